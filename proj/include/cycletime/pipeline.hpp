#pragma once

// End-to-end training: label each source (features + aligned telemetry),
// split, normalize on the training rows and fit one network per axis.

#include <map>
#include <string>

#include "cycletime/dataset.hpp"
#include "cycletime/features.hpp"
#include "cycletime/gcode.hpp"
#include "cycletime/mlp.hpp"
#include "cycletime/predictor.hpp"

namespace cycletime::pipeline {

struct SourceData {
  gcode::Toolpath toolpath;
  dataset::TelemetryLog telemetry;
};

struct PipelineConfig {
  mlp::LayerSpec layers{{9, 5, 10, 1}};
  mlp::TrainConfig train;
  double coverage_threshold = dataset::kDefaultCoverageThreshold;
};

struct AxisTraining {
  mlp::TrainReport report;
  double test_mse = 0.0;  // normalized domain
  std::size_t train_rows = 0;
  std::size_t validation_rows = 0;
  std::size_t test_rows = 0;
};

struct TrainedModels {
  predictor::AxisModelSet<mlp::Mlp> models;
  PerAxis<AxisTraining> training;
};

inline PerAxis<dataset::LabeledDataset> label_source(const SourceData& src,
                                                     double coverage_threshold) {
  const auto rows = features::extract_features(src.toolpath);
  const auto aligned = dataset::align_telemetry(src.toolpath, src.telemetry, coverage_threshold);
  return dataset::build_dataset(rows, aligned, src.toolpath.source_name);
}

inline mlp::Samples to_samples(const dataset::LabeledDataset& ds) {
  mlp::Samples s;
  s.width = features::kFeatureCount;
  for (const auto& row : ds.rows) s.push_back(row.features, row.target);
  return s;
}

/// Per-axis init seed: cfg.train.seed + axis index.
inline TrainedModels train_axis_models(const std::map<std::string, SourceData>& sources,
                                       const dataset::SplitSpec& spec, const PipelineConfig& cfg) {
  PerAxis<std::map<std::string, dataset::LabeledDataset>> by_axis;
  for (const auto& [name, src] : sources) {
    auto labeled = label_source(src, cfg.coverage_threshold);
    for (Axis a : kAxes) {
      for (auto& row : labeled[a].rows) row.source_name = name;
      by_axis[a].emplace(name, std::move(labeled[a]));
    }
  }

  TrainedModels out;
  for (Axis a : kAxes) {
    const auto parts = dataset::split(by_axis[a], spec);
    if (parts.train.empty() || parts.validation.empty()) {
      throw Error(ErrorKind::EmptySet, std::string("axis ") + axis_letter(a) +
                                           ": training or validation split is empty");
    }
    const auto maps = dataset::fit_normalization_maps(parts.train);
    const auto train = to_samples(dataset::apply_normalization(parts.train, maps));
    const auto val = to_samples(dataset::apply_normalization(parts.validation, maps));

    const auto init = mlp::Mlp::init(cfg.layers, cfg.train.seed + axis_index(a));
    auto result = mlp::train(init, train, val, cfg.train);
    result.model.set_normalization(maps);

    auto& info = out.training[a];
    info.report = std::move(result.report);
    info.train_rows = parts.train.size();
    info.validation_rows = parts.validation.size();
    info.test_rows = parts.test.size();
    if (!parts.test.empty()) {
      info.test_mse = mlp::batch_mse(result.model, to_samples(dataset::apply_normalization(parts.test, maps)));
    }
    out.models[a] = std::move(result.model);
  }
  return out;
}

}  // namespace cycletime::pipeline
