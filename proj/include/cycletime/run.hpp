#pragma once

// File-level plumbing shared by the command-line tool and the acceptance
// runner: training run configs, model directories and evaluation tables.

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cycletime/error.hpp"
#include "cycletime/io.hpp"
#include "cycletime/pipeline.hpp"

namespace cycletime::run {

namespace fs = std::filesystem;
using nlohmann::json;

struct SourcePaths {
  fs::path nc;
  fs::path telemetry;
};

struct TrainRunConfig {
  std::map<std::string, SourcePaths> sources;
  dataset::SplitSpec split;
  pipeline::PipelineConfig pipeline;
  double rapid_rate = gcode::kDefaultRapidRate;
  fs::path output_dir;
};

namespace detail {

inline const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::InvalidConfig, std::string("missing key '") + key + "'");
  return j.at(key);
}

inline dataset::SourceRange source_range(const json& j) {
  dataset::SourceRange r;
  r.source = require(j, "source").get<std::string>();
  r.range.begin = j.value("begin", 0.0);
  r.range.end = j.value("end", 1.0);
  return r;
}

inline fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace detail

/// Relative paths in the config resolve against `base_dir` (normally the
/// directory holding the config file).
inline TrainRunConfig parse_train_config(const json& j, const fs::path& base_dir) {
  TrainRunConfig cfg;
  try {
    for (const auto& [name, src] : detail::require(j, "sources").items()) {
      cfg.sources[name] = {detail::resolve(base_dir, detail::require(src, "nc").get<std::string>()),
                           detail::resolve(base_dir, detail::require(src, "telemetry").get<std::string>())};
    }
    const json& sp = detail::require(j, "split");
    cfg.split.train = detail::require(sp, "train").get<std::vector<std::string>>();
    cfg.split.validation = detail::source_range(detail::require(sp, "validation"));
    cfg.split.test = detail::source_range(detail::require(sp, "test"));

    if (j.contains("layers")) cfg.pipeline.layers.sizes = j.at("layers").get<std::vector<std::size_t>>();
    if (j.contains("train")) {
      const json& t = j.at("train");
      auto& tc = cfg.pipeline.train;
      tc.max_epochs = t.value("max_epochs", tc.max_epochs);
      tc.learning_rate = t.value("learning_rate", tc.learning_rate);
      tc.momentum = t.value("momentum", tc.momentum);
      tc.patience = t.value("patience", tc.patience);
      tc.min_delta = t.value("min_delta", tc.min_delta);
      tc.seed = t.value("seed", tc.seed);
    }
    cfg.pipeline.coverage_threshold = j.value("coverage_threshold", cfg.pipeline.coverage_threshold);
    cfg.rapid_rate = j.value("rapid_rate", cfg.rapid_rate);
    cfg.output_dir = detail::resolve(base_dir, j.value("output_dir", std::string("models")));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("bad train config: ") + e.what());
  }
  if (cfg.sources.empty()) throw Error(ErrorKind::InvalidConfig, "train config lists no sources");
  cfg.pipeline.layers.validate();
  cfg.pipeline.train.validate();
  return cfg;
}

inline TrainRunConfig load_train_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, path.string() + ": " + e.what());
  }
  return parse_train_config(j, path.parent_path());
}

inline gcode::Toolpath load_toolpath(const fs::path& nc, double rapid_rate, std::string name = {}) {
  if (name.empty()) name = nc.stem().string();
  return gcode::parse_nc_program(io::read_file(nc), rapid_rate, name);
}

inline std::map<std::string, pipeline::SourceData> load_sources(const TrainRunConfig& cfg) {
  std::map<std::string, pipeline::SourceData> out;
  for (const auto& [name, paths] : cfg.sources) {
    auto log = io::load_telemetry(paths.telemetry);
    log.source_name = name;
    out.emplace(name, pipeline::SourceData{load_toolpath(paths.nc, cfg.rapid_rate, name), std::move(log)});
  }
  return out;
}

inline fs::path model_path(const fs::path& dir, Axis a) {
  return dir / (std::string("model_") + axis_letter(a) + ".json");
}

inline json train_summary_json(const pipeline::TrainedModels& trained, const TrainRunConfig& cfg) {
  json axes = json::object();
  for (Axis a : kAxes) {
    const auto& t = trained.training[a];
    json r = io::train_report_json(t.report);
    r["test_mse"] = t.test_mse;
    r["train_rows"] = t.train_rows;
    r["validation_rows"] = t.validation_rows;
    r["test_rows"] = t.test_rows;
    axes[std::string(1, axis_letter(a))] = std::move(r);
  }
  return {{"train_sources", cfg.split.train},
          {"validation", {{"source", cfg.split.validation.source},
                          {"begin", cfg.split.validation.range.begin},
                          {"end", cfg.split.validation.range.end}}},
          {"test", {{"source", cfg.split.test.source},
                    {"begin", cfg.split.test.range.begin},
                    {"end", cfg.split.test.range.end}}},
          {"layers", cfg.pipeline.layers.sizes},
          {"seed", cfg.pipeline.train.seed},
          {"axes", std::move(axes)}};
}

/// Writes model_{x,y,z}.json and train_report.json into cfg.output_dir.
inline void write_training_outputs(const pipeline::TrainedModels& trained, const TrainRunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const json provenance = {{"train_sources", cfg.split.train},
                           {"validation_source", cfg.split.validation.source}};
  for (Axis a : kAxes) {
    json p = provenance;
    p["axis"] = std::string(1, axis_letter(a));
    io::save_model(trained.models[a], model_path(cfg.output_dir, a), p);
  }
  io::write_file_atomic(cfg.output_dir / "train_report.json", train_summary_json(trained, cfg).dump(1) + "\n");
}

inline predictor::AxisModelSet<mlp::Mlp> load_model_set(const fs::path& dir) {
  predictor::AxisModelSet<mlp::Mlp> models;
  for (Axis a : kAxes) {
    const fs::path p = model_path(dir, a);
    if (!fs::exists(p)) throw Error(ErrorKind::Io, "model file not found: " + p.string());
    models[a] = io::load_model(p);
  }
  predictor::check_model_set(models);
  return models;
}

/// The telemetry log's last timestamp, taken as the measured cycle time.
inline double measured_from_log(const dataset::TelemetryLog& log) {
  dataset::validate_log(log);
  return log.samples.back().t - log.samples.front().t;
}

// ---- evaluation tables -------------------------------------------------------------

struct EvaluationRow {
  std::string pocket;
  double measured = 0.0;
  std::optional<double> cam;
  std::optional<double> nn;
};

inline std::vector<EvaluationRow> evaluation_rows_from_csv(std::string_view text) {
  const auto lines = io::csv_lines(text);
  if (lines.empty()) throw Error(ErrorKind::Empty, "evaluation CSV is empty");
  const auto header = io::split_csv_line(lines.front());
  if (header != std::vector<std::string>{"pocket", "measured_s", "cam_s", "nn_s"}) {
    throw Error(ErrorKind::MalformedBlock, "evaluation CSV header must be pocket,measured_s,cam_s,nn_s", 1);
  }
  std::vector<EvaluationRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = io::split_csv_line(lines[i]);
    if (cells.size() != 4) throw Error(ErrorKind::MalformedBlock, "expected 4 columns", static_cast<int>(i + 1));
    EvaluationRow r;
    r.pocket = cells[0];
    r.measured = io::parse_double(cells[1], i + 1);
    if (!cells[2].empty()) r.cam = io::parse_double(cells[2], i + 1);
    if (!cells[3].empty()) r.nn = io::parse_double(cells[3], i + 1);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline EvaluationRow evaluation_row_from_summary(const json& j) {
  try {
    if (!j.contains("measured_s")) {
      throw Error(ErrorKind::InvalidConfig,
                  "report for '" + j.value("source_name", std::string("?")) + "' has no measured_s");
    }
    return {j.at("source_name").get<std::string>(), j.at("measured_s").get<double>(),
            j.at("cam_s").get<double>(), j.at("nn_s").get<double>()};
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("bad prediction report: ") + e.what());
  }
}

/// Accepts either prediction summary JSON files or a pocket,measured_s,cam_s,nn_s CSV.
inline std::vector<EvaluationRow> load_evaluation_rows(const std::vector<fs::path>& paths) {
  std::vector<EvaluationRow> rows;
  for (const auto& p : paths) {
    const std::string text = io::read_file(p);
    if (p.extension() == ".json") {
      json j;
      try {
        j = json::parse(text);
      } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, p.string() + ": " + e.what());
      }
      rows.push_back(evaluation_row_from_summary(j));
    } else {
      auto more = evaluation_rows_from_csv(text);
      rows.insert(rows.end(), more.begin(), more.end());
    }
  }
  if (rows.empty()) throw Error(ErrorKind::Empty, "nothing to evaluate");
  return rows;
}

/// Columns follow the published comparison tables: pocket, measured, CAM
/// estimate and its error, network estimate and its error.
inline std::string evaluation_table(const std::vector<EvaluationRow>& rows) {
  std::string out = "pocket,measured_s,cam_s,cam_err_pct,nn_s,nn_err_pct\n";
  char buf[256];
  const auto cell = [&](const std::optional<double>& v, const char* fmt) {
    if (!v) return std::string();
    std::snprintf(buf, sizeof buf, fmt, *v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    std::optional<double> cam_err, nn_err;
    if (r.cam) cam_err = predictor::evaluate(*r.cam, r.measured);
    if (r.nn) nn_err = predictor::evaluate(*r.nn, r.measured);
    out += r.pocket + "," + cell(r.measured, "%.2f") + "," + cell(r.cam, "%.2f") + "," +
           cell(cam_err, "%.2f") + "," + cell(r.nn, "%.2f") + "," + cell(nn_err, "%.2f") + "\n";
  }
  return out;
}

}  // namespace cycletime::run
