#pragma once

// File formats: telemetry CSV, machine limits JSON, model JSON (with CRC-32
// checksum), dataset archive JSON and prediction reports.

#include <unistd.h>

#include <boost/crc.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cycletime/dataset.hpp"
#include "cycletime/error.hpp"
#include "cycletime/mlp.hpp"
#include "cycletime/normalization.hpp"
#include "cycletime/predictor.hpp"
#include "cycletime/simulator.hpp"

namespace cycletime::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "failed reading " + path.string());
  return ss.str();
}

/// Writes through a temporary sibling and renames it into place.
inline void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot rename into " + path.string());
  }
}

inline std::string crc32_hex(std::string_view bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(crc.checksum()));
  return buf;
}

// ---- CSV helpers -----------------------------------------------------------

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

inline std::vector<std::string> csv_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

inline double parse_double(const std::string& cell, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidConfig,
                "bad number '" + cell + "' on CSV line " + std::to_string(line_no));
  }
}

// ---- telemetry ---------------------------------------------------------------

inline constexpr std::string_view kTelemetryHeader = "t,x,y,z,vx,vy,vz";

inline std::string telemetry_csv(const dataset::TelemetryLog& log) {
  std::string out(kTelemetryHeader);
  out += '\n';
  char buf[256];
  for (const auto& s : log.samples) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", s.t, s.position.x,
                  s.position.y, s.position.z, s.velocity.x, s.velocity.y, s.velocity.z);
    out += buf;
  }
  return out;
}

inline dataset::TelemetryLog parse_telemetry_csv(std::string_view text, std::string source_name = {}) {
  const auto lines = csv_lines(text);
  if (lines.empty() || lines.front() != kTelemetryHeader) {
    throw Error(ErrorKind::InvalidConfig,
                "telemetry CSV must start with header '" + std::string(kTelemetryHeader) + "'");
  }
  dataset::TelemetryLog log;
  log.source_name = std::move(source_name);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv_line(lines[i]);
    if (cells.size() != 7) {
      throw Error(ErrorKind::InvalidConfig, "telemetry CSV line " + std::to_string(i + 1) +
                                                " must have 7 columns");
    }
    double v[7];
    for (std::size_t c = 0; c < 7; ++c) v[c] = parse_double(cells[c], i + 1);
    log.samples.push_back({v[0], {v[1], v[2], v[3]}, {v[4], v[5], v[6]}});
  }
  dataset::validate_log(log);
  const double span = log.samples.back().t - log.samples.front().t;
  log.nominal_rate = static_cast<double>(log.samples.size() - 1) / span;
  return log;
}

inline dataset::TelemetryLog load_telemetry(const fs::path& path) {
  return parse_telemetry_csv(read_file(path), path.stem().string());
}

// ---- machine limits ------------------------------------------------------------

inline json vec3_json(const Vec3& v) { return {{"x", v.x}, {"y", v.y}, {"z", v.z}}; }

inline Vec3 vec3_from(const json& j) {
  return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("z").get<double>()};
}

inline json limits_json(const sim::MachineLimits& l) {
  return {{"max_feedrate", vec3_json(l.max_feedrate)},
          {"max_accel", vec3_json(l.max_acceleration)},
          {"rapid_rate", l.rapid_rate},
          {"corner_exponent", l.corner_exponent},
          {"sample_rate", l.sample_rate},
          {"noise_stddev", l.noise_stddev},
          {"seed", l.seed}};
}

/// Missing keys keep their defaults.
inline sim::MachineLimits limits_from_json(const json& j) {
  sim::MachineLimits l;
  try {
    if (j.contains("max_feedrate")) l.max_feedrate = vec3_from(j.at("max_feedrate"));
    if (j.contains("max_accel")) l.max_acceleration = vec3_from(j.at("max_accel"));
    l.rapid_rate = j.value("rapid_rate", l.rapid_rate);
    l.corner_exponent = j.value("corner_exponent", l.corner_exponent);
    l.sample_rate = j.value("sample_rate", l.sample_rate);
    l.noise_stddev = j.value("noise_stddev", l.noise_stddev);
    l.seed = j.value("seed", l.seed);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidLimits, std::string("bad limits file: ") + e.what());
  }
  l.validate();
  return l;
}

inline sim::MachineLimits load_limits(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidLimits, std::string("limits file is not JSON: ") + e.what());
  }
  return limits_from_json(j);
}

// ---- models ----------------------------------------------------------------------

inline json affine_json(const AffineMap& m) {
  return {{"offset", m.offset}, {"scale", m.scale}, {"zero_width", m.zero_width}};
}

inline AffineMap affine_from(const json& j) {
  return {j.at("offset").get<double>(), j.at("scale").get<double>(), j.at("zero_width").get<bool>()};
}

inline json normalization_json(const Normalization& n) {
  json features = json::array();
  for (const auto& m : n.features) features.push_back(affine_json(m));
  return {{"features", features}, {"target", affine_json(n.target)}};
}

inline Normalization normalization_from(const json& j) {
  Normalization n;
  for (const auto& f : j.at("features")) n.features.push_back(affine_from(f));
  n.target = affine_from(j.at("target"));
  return n;
}

inline constexpr std::string_view kModelFormat = "cycletime-mlp";

inline json model_json(const mlp::Mlp& m, const json& provenance = json::object()) {
  json weights = json::array();
  json biases = json::array();
  for (const auto& layer : m.layers()) {
    json rows = json::array();
    for (std::size_t r = 0; r < layer.weights.rows; ++r) {
      json row = json::array();
      for (std::size_t c = 0; c < layer.weights.cols; ++c) row.push_back(layer.weights(r, c));
      rows.push_back(row);
    }
    weights.push_back(rows);
    biases.push_back(layer.biases);
  }
  json body = {{"format", kModelFormat},
               {"version", 1},
               {"spec", m.spec().sizes},
               {"weights", weights},
               {"biases", biases},
               {"normalization", normalization_json(m.normalization())},
               {"seed", m.seed()},
               {"provenance", provenance}};
  body["checksum"] = crc32_hex(body.dump());
  return body;
}

inline std::string model_text(const mlp::Mlp& m, const json& provenance = json::object()) {
  return model_json(m, provenance).dump(1) + "\n";
}

inline void save_model(const mlp::Mlp& m, const fs::path& path,
                       const json& provenance = json::object()) {
  write_file_atomic(path, model_text(m, provenance));
}

inline mlp::Mlp parse_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::CorruptModel, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("checksum")) {
      throw Error(ErrorKind::CorruptModel, "model file has no checksum");
    }
    const std::string stored = j.at("checksum").get<std::string>();
    json body = j;
    body.erase("checksum");
    if (crc32_hex(body.dump()) != stored) {
      throw Error(ErrorKind::CorruptModel, "checksum mismatch");
    }
    if (body.at("format").get<std::string>() != kModelFormat) {
      throw Error(ErrorKind::CorruptModel, "unexpected format tag");
    }
    mlp::LayerSpec spec{body.at("spec").get<std::vector<std::size_t>>()};
    spec.validate();
    const auto& weights = body.at("weights");
    const auto& biases = body.at("biases");
    if (weights.size() != spec.layer_count() || biases.size() != spec.layer_count()) {
      throw Error(ErrorKind::CorruptModel, "layer count does not match declared spec");
    }
    std::vector<mlp::Layer> layers;
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
      const auto& rows = weights.at(l);
      mlp::Layer layer;
      layer.weights = mlp::Matrix(rows.size(), rows.empty() ? 0 : rows.at(0).size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows.at(r).size() != layer.weights.cols) {
          throw Error(ErrorKind::CorruptModel, "ragged weight matrix");
        }
        for (std::size_t c = 0; c < layer.weights.cols; ++c) {
          layer.weights(r, c) = rows.at(r).at(c).get<double>();
        }
      }
      layer.biases = biases.at(l).get<std::vector<double>>();
      layers.push_back(std::move(layer));
    }
    auto model = mlp::Mlp::from_parameters(spec, std::move(layers), body.at("seed").get<std::uint64_t>());
    auto norm = normalization_from(body.at("normalization"));
    if (!norm.features.empty() && norm.features.size() != spec.inputs()) {
      throw Error(ErrorKind::CorruptModel, "normalization width does not match inputs");
    }
    model.set_normalization(std::move(norm));
    return model;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CorruptModel) throw;
    throw Error(ErrorKind::CorruptModel, e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::CorruptModel, std::string("malformed model file: ") + e.what());
  }
}

inline mlp::Mlp load_model(const fs::path& path) { return parse_model(read_file(path)); }

// ---- datasets ---------------------------------------------------------------------

inline json dataset_json(const dataset::LabeledDataset& ds, const json& provenance = json::object()) {
  json features = json::array();
  json targets = json::array();
  json locations = json::array();
  json sources = json::array();
  for (const auto& row : ds.rows) {
    features.push_back(row.features);
    targets.push_back(row.target);
    locations.push_back(row.location_index);
    sources.push_back(row.source_name);
  }
  json names = json::array();
  for (const char* n : features::kFeatureNames) names.push_back(n);
  return {{"axis", std::string(1, axis_letter(ds.axis))},
          {"feature_names", names},
          {"features", features},
          {"targets", targets},
          {"location_index", locations},
          {"source_name", sources},
          {"normalized", ds.normalized},
          {"normalization", ds.normalized ? normalization_json(ds.normalization) : json(nullptr)},
          {"provenance", provenance}};
}

inline dataset::LabeledDataset dataset_from(const json& j) {
  dataset::LabeledDataset ds;
  const std::string axis = j.at("axis").get<std::string>();
  ds.axis = axis == "y" ? Axis::Y : axis == "z" ? Axis::Z : Axis::X;
  const auto& f = j.at("features");
  for (std::size_t i = 0; i < f.size(); ++i) {
    dataset::LabeledRow row;
    row.features = f.at(i).get<features::FeatureValues>();
    row.target = j.at("targets").at(i).get<double>();
    row.location_index = j.at("location_index").at(i).get<int>();
    row.source_name = j.at("source_name").at(i).get<std::string>();
    ds.rows.push_back(std::move(row));
  }
  ds.normalized = j.at("normalized").get<bool>();
  if (ds.normalized) ds.normalization = normalization_from(j.at("normalization"));
  return ds;
}

// ---- training report -----------------------------------------------------------------

inline json train_report_json(const mlp::TrainReport& r) {
  return {{"train_mse", r.train_mse},
          {"validation_mse", r.validation_mse},
          {"stopped_epoch", r.stopped_epoch},
          {"best_epoch", r.best_epoch},
          {"best_validation_mse", r.best_validation_mse}};
}

// ---- prediction reports -----------------------------------------------------------------

inline std::string prediction_csv(const predictor::PredictionReport& r) {
  std::string out = "n,commanded_f,fx,fy,fz,f,timing_f,length_mm,seconds\n";
  char buf[512];
  std::size_t p = 0;
  for (const auto& seg : r.segments) {
    while (p < r.locations.size() && r.locations[p].location_index < seg.location_index) ++p;
    const bool has = p < r.locations.size() && r.locations[p].location_index == seg.location_index;
    if (has) {
      const auto& loc = r.locations[p];
      std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                    seg.location_index, seg.commanded_feedrate, loc.axis_feedrate.x,
                    loc.axis_feedrate.y, loc.axis_feedrate.z, loc.feedrate, seg.feedrate,
                    seg.length, seg.seconds);
    } else {
      std::snprintf(buf, sizeof buf, "%d,%.10g,,,,,%.10g,%.10g,%.10g\n", seg.location_index,
                    seg.commanded_feedrate, seg.feedrate, seg.length, seg.seconds);
    }
    out += buf;
  }
  return out;
}

inline json prediction_summary_json(const predictor::PredictionReport& r) {
  json j = {{"source_name", r.source_name}, {"cam_s", r.cam_baseline_time}, {"nn_s", r.predicted_cycle_time}};
  if (r.measured_time) j["measured_s"] = *r.measured_time;
  if (r.cam_error_percent) j["cam_err_pct"] = *r.cam_error_percent;
  if (r.nn_error_percent) j["nn_err_pct"] = *r.nn_error_percent;
  return j;
}

}  // namespace cycletime::io
