#pragma once

// Central finite differences of the batch MSE, one parameter at a time. The
// five-point stencil keeps truncation error at O(h^4), so a step near 1e-3
// balances it against roundoff far below the 1e-6 tolerance.

#include <algorithm>
#include <cmath>
#include <random>

#include "cycletime/mlp.hpp"

namespace oracle {

struct GradientCheck {
  std::size_t compared = 0;
  std::size_t failed = 0;
  double worst_relative = 0.0;
};

/// Relative tolerance applies where |g| > abs_floor; below it the absolute one.
inline GradientCheck check_gradients(const cycletime::mlp::Mlp& model, const cycletime::mlp::Samples& batch,
                                     double h, double rel_tol, double abs_floor) {
  using namespace cycletime::mlp;
  const Gradients g = gradients(model, batch);
  GradientCheck out;
  Mlp probe = model;
  const auto compare = [&](double& param, double analytic) {
    const double saved = param;
    const auto at = [&](double offset) {
      param = saved + offset;
      return batch_mse(probe, batch);
    };
    const double near = at(h) - at(-h);
    const double far = at(2.0 * h) - at(-2.0 * h);
    param = saved;
    const double numeric = (8.0 * near - far) / (12.0 * h);
    ++out.compared;
    const double diff = std::abs(numeric - analytic);
    const double scale = std::max(std::abs(numeric), std::abs(analytic));
    if (scale <= abs_floor) {
      if (diff > abs_floor) ++out.failed;
    } else {
      out.worst_relative = std::max(out.worst_relative, diff / scale);
      if (diff / scale > rel_tol) ++out.failed;
    }
  };
  auto& layers = probe.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t i = 0; i < layers[l].weights.data.size(); ++i) compare(layers[l].weights.data[i], g.weights[l].data[i]);
    for (std::size_t i = 0; i < layers[l].biases.size(); ++i) compare(layers[l].biases[i], g.biases[l][i]);
  }
  return out;
}

inline cycletime::mlp::Samples random_batch(std::mt19937_64& rng, std::size_t width, std::size_t count) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  cycletime::mlp::Samples s;
  s.width = width;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> x(width);
    for (double& v : x) v = u(rng);
    s.push_back(x, u(rng));
  }
  return s;
}

/// Random weights and biases in [-1, 1], so biases are nonzero too.
inline cycletime::mlp::Mlp random_net(const cycletime::mlp::LayerSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto m = cycletime::mlp::Mlp::init(spec, rng());
  for (auto& layer : m.layers()) {
    for (double& w : layer.weights.data) w = u(rng);
    for (double& b : layer.biases) b = u(rng);
  }
  return m;
}

}  // namespace oracle
