// cycletime: parse NC programs, simulate telemetry, extract features, train
// the per-axis networks, predict cycle times and tabulate errors.
//
// Exit codes: 0 success, 1 internal error, 2 user or input error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cycletime/error.hpp"
#include "cycletime/features.hpp"
#include "cycletime/gcode.hpp"
#include "cycletime/io.hpp"
#include "cycletime/pipeline.hpp"
#include "cycletime/predictor.hpp"
#include "cycletime/run.hpp"
#include "cycletime/simulator.hpp"

namespace fs = std::filesystem;
using namespace cycletime;

namespace {

constexpr int kUserError = 2;
constexpr int kInternalError = 1;

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw Error(ErrorKind::Io, std::string(what) + " not found: " + p.string());
}

sim::MachineLimits limits_or_default(const std::string& path) {
  if (path.empty()) return {};
  require_file(path, "limits file");
  return io::load_limits(path);
}

struct ParseArgs {
  std::string nc;
  std::string dump;
  double rapid_rate = gcode::kDefaultRapidRate;
};

int cmd_parse(const ParseArgs& a) {
  require_file(a.nc, "NC file");
  const auto tp = run::load_toolpath(a.nc, a.rapid_rate);
  const auto s = gcode::toolpath_summary(tp);
  std::printf("blocks: %zu\n", s.block_count);
  std::printf("total_length_mm: %.6f\n", s.total_length);
  std::printf("linear_length_mm: %.6f\n", s.linear_length);
  std::printf("rapid_length_mm: %.6f\n", s.rapid_length);
  if (!a.dump.empty()) io::write_file_atomic(a.dump, gcode::to_canonical_nc(tp));
  return 0;
}

struct SimulateArgs {
  std::string nc;
  std::string limits;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  require_file(a.nc, "NC file");
  const auto limits = limits_or_default(a.limits);
  const auto tp = run::load_toolpath(a.nc, limits.rapid_rate);
  const auto traj = sim::plan_profile(tp, limits);
  const auto log = sim::emit_telemetry(traj, limits, tp.source_name);
  const std::string out = a.out.empty() ? fs::path(a.nc).replace_extension(".csv").string() : a.out;
  io::write_file_atomic(out, io::telemetry_csv(log));
  std::printf("measured_s: %.6f\n", sim::measured_cycle_time(traj));
  std::printf("cam_s: %.6f\n", predictor::cam_baseline_time(tp));
  std::printf("samples: %zu\n", log.samples.size());
  return 0;
}

struct FeaturesArgs {
  std::string nc;
  std::string out;
  std::string telemetry;
  double rapid_rate = gcode::kDefaultRapidRate;
  double coverage = dataset::kDefaultCoverageThreshold;
};

int cmd_features(const FeaturesArgs& a) {
  require_file(a.nc, "NC file");
  const auto tp = run::load_toolpath(a.nc, a.rapid_rate);
  const auto rows = features::extract_features(tp);
  std::string text;
  if (a.telemetry.empty()) {
    text = features::features_csv(rows);
  } else {
    // Labeled form: one archive per axis, keyed by axis letter.
    require_file(a.telemetry, "telemetry file");
    const auto log = io::load_telemetry(a.telemetry);
    const auto labeled = dataset::build_dataset(rows, dataset::align_telemetry(tp, log, a.coverage),
                                                tp.source_name);
    nlohmann::json j = nlohmann::json::object();
    for (Axis ax : kAxes) j[std::string(1, axis_letter(ax))] = io::dataset_json(labeled[ax]);
    text = j.dump(1) + "\n";
  }
  if (a.out.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    io::write_file_atomic(a.out, text);
    std::printf("rows_per_axis: %zu\n", rows[Axis::X].size());
  }
  return 0;
}

struct TrainArgs {
  std::string config;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& a) {
  require_file(a.config, "train config");
  auto cfg = run::load_train_config(a.config);
  if (!a.output_dir.empty()) cfg.output_dir = a.output_dir;
  if (a.seed) cfg.pipeline.train.seed = *a.seed;
  for (const auto& [name, p] : cfg.sources) {
    require_file(p.nc, "NC file");
    require_file(p.telemetry, "telemetry file");
  }
  const auto sources = run::load_sources(cfg);
  const auto trained = pipeline::train_axis_models(sources, cfg.split, cfg.pipeline);
  run::write_training_outputs(trained, cfg);
  for (Axis ax : kAxes) {
    const auto& t = trained.training[ax];
    std::printf("axis %c: rows %zu/%zu/%zu, best epoch %zu, val mse %.6g, test mse %.6g\n",
                axis_letter(ax), t.train_rows, t.validation_rows, t.test_rows, t.report.best_epoch,
                t.report.best_validation_mse, t.test_mse);
  }
  std::printf("models written to %s\n", cfg.output_dir.string().c_str());
  return 0;
}

struct PredictArgs {
  std::string nc;
  std::string models;
  std::string measured;
  std::optional<double> measured_time;
  std::string out_dir;
  double rapid_rate = gcode::kDefaultRapidRate;
};

int cmd_predict(const PredictArgs& a) {
  require_file(a.nc, "NC file");
  const auto models = run::load_model_set(a.models);
  const auto tp = run::load_toolpath(a.nc, a.rapid_rate);
  std::optional<double> measured = a.measured_time;
  if (!a.measured.empty()) {
    require_file(a.measured, "telemetry file");
    measured = run::measured_from_log(io::load_telemetry(a.measured));
  }
  const auto report = predictor::predict_report(models, tp, measured);
  const fs::path dir = a.out_dir.empty() ? fs::path(".") : fs::path(a.out_dir);
  fs::create_directories(dir);
  io::write_file_atomic(dir / (tp.source_name + "_prediction.csv"), io::prediction_csv(report));
  io::write_file_atomic(dir / (tp.source_name + "_report.json"),
                        io::prediction_summary_json(report).dump(1) + "\n");
  std::printf("cam_s: %.2f\n", report.cam_baseline_time);
  std::printf("nn_s: %.2f\n", report.predicted_cycle_time);
  if (report.measured_time) {
    std::printf("measured_s: %.2f\n", *report.measured_time);
    std::printf("cam_err_pct: %.2f\n", *report.cam_error_percent);
    std::printf("nn_err_pct: %.2f\n", *report.nn_error_percent);
  }
  return 0;
}

struct EvaluateArgs {
  std::vector<std::string> inputs;
  std::string out;
};

int cmd_evaluate(const EvaluateArgs& a) {
  if (a.inputs.empty()) throw Error(ErrorKind::Empty, "no reports given");
  std::vector<fs::path> paths;
  for (const auto& p : a.inputs) {
    require_file(p, "report");
    paths.emplace_back(p);
  }
  const std::string table = run::evaluation_table(run::load_evaluation_rows(paths));
  if (!a.out.empty()) io::write_file_atomic(a.out, table);
  std::fputs(table.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Machining cycle time prediction from NC programs"};
  app.require_subcommand(1);

  ParseArgs parse_args;
  auto* parse = app.add_subcommand("parse", "Parse an NC program and print a summary");
  parse->add_option("nc", parse_args.nc, "NC program")->required();
  parse->add_option("--dump", parse_args.dump, "Write the canonical program to this path");
  parse->add_option("--rapid-rate", parse_args.rapid_rate, "Feedrate assigned to G0 moves, mm/min");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Run the machine simulator and write telemetry");
  simulate->add_option("nc", sim_args.nc, "NC program")->required();
  simulate->add_option("--limits", sim_args.limits, "Machine limits JSON (defaults if omitted)");
  simulate->add_option("--out", sim_args.out, "Telemetry CSV path (default: next to the program)");

  FeaturesArgs feat_args;
  auto* feats = app.add_subcommand("features", "Extract per-axis feature rows");
  feats->add_option("nc", feat_args.nc, "NC program")->required();
  feats->add_option("--out", feat_args.out, "Output path (default: stdout)");
  feats->add_option("--telemetry", feat_args.telemetry, "Label rows from this telemetry log (JSON output)");
  feats->add_option("--rapid-rate", feat_args.rapid_rate, "Feedrate assigned to G0 moves, mm/min");
  feats->add_option("--coverage", feat_args.coverage, "Alignment distance warning threshold, mm");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train the three axis networks from a JSON config");
  train->add_option("config", train_args.config, "Train config JSON")->required();
  train->add_option("--output-dir", train_args.output_dir, "Override the config's output_dir");
  train->add_option("--seed", train_args.seed, "Override the training seed");

  PredictArgs pred_args;
  auto* predict = app.add_subcommand("predict", "Predict the cycle time of an NC program");
  predict->add_option("nc", pred_args.nc, "NC program")->required();
  predict->add_option("--models", pred_args.models, "Directory with model_x/y/z.json")->required();
  auto* measured = predict->add_option("--measured", pred_args.measured, "Telemetry log of the real run");
  predict->add_option("--measured-time", pred_args.measured_time, "Measured cycle time, s")->excludes(measured);
  predict->add_option("--out-dir", pred_args.out_dir, "Directory for the CSV and JSON reports");
  predict->add_option("--rapid-rate", pred_args.rapid_rate, "Feedrate assigned to G0 moves, mm/min");

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Tabulate measured vs predicted cycle times");
  evaluate->add_option("inputs", eval_args.inputs, "Prediction JSON reports or a pocket,measured_s,cam_s,nn_s CSV");
  evaluate->add_option("--out", eval_args.out, "Also write the table to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUserError;
  }

  try {
    if (*parse) return cmd_parse(parse_args);
    if (*simulate) return cmd_simulate(sim_args);
    if (*feats) return cmd_features(feat_args);
    if (*train) return cmd_train(train_args);
    if (*predict) return cmd_predict(pred_args);
    if (*evaluate) return cmd_evaluate(eval_args);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUserError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternalError;
  }
  return kInternalError;
}
