#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cycletime/io.hpp"
#include "cycletime/mlp.hpp"
#include "oracles/finite_difference.hpp"
#include "oracles/forward_oracle.hpp"

namespace {

using namespace cycletime;
using namespace cycletime::mlp;

const LayerSpec kAxisNet{{9, 5, 10, 1}};

TEST(Mlp, InitShapesAndDeterminism) {
  const auto a = Mlp::init(kAxisNet, 42);
  const auto b = Mlp::init(kAxisNet, 42);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.layers().size(), 3u);
  const std::size_t rows[] = {5, 10, 1}, cols[] = {9, 5, 10};
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_EQ(a.layers()[l].weights.rows, rows[l]);
    EXPECT_EQ(a.layers()[l].weights.cols, cols[l]);
    EXPECT_EQ(a.layers()[l].biases.size(), rows[l]);
    const double bound = 1.0 / std::sqrt(double(cols[l]));
    for (double w : a.layers()[l].weights.data) EXPECT_LE(std::abs(w), bound);
  }
  EXPECT_NE(Mlp::init(kAxisNet, 43), a);
}

TEST(Mlp, InvalidSpecs) {
  for (const auto& sizes : {std::vector<std::size_t>{2, 0, 1}, {9, 1}, {9, 5, 2}, {}}) {
    try {
      Mlp::init(LayerSpec{sizes}, 1);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidSpec);
    }
  }
}

TEST(Mlp, ForwardExamples) {
  auto zero = Mlp::init(kAxisNet, 1);
  for (auto& layer : zero.layers()) std::fill(layer.weights.data.begin(), layer.weights.data.end(), 0.0);
  const std::vector<double> x{1, -2, 3, 0.5, 7, -1, 2, 2, 9};
  EXPECT_EQ(zero.forward(x), 0.0);

  Layer hidden{Matrix(1, 1), {0.0}}, out{Matrix(1, 1), {0.0}};
  hidden.weights(0, 0) = 1.0;
  out.weights(0, 0) = 1.0;
  const auto tiny = Mlp::from_parameters(LayerSpec{{1, 1, 1}}, {hidden, out});
  EXPECT_DOUBLE_EQ(tiny.forward(std::vector<double>{1.0}), std::tanh(1.0));

  EXPECT_THROW(zero.forward(std::vector<double>{1.0, 2.0}), Error);
}

TEST(Mlp, ForwardMatchesOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = oracle::random_net(kAxisNet, rng);
    std::vector<double> x(9);
    for (double& v : x) v = u(rng);
    EXPECT_NEAR(m.forward(x), oracle::forward(oracle::copy_of(m), x), 1e-12);
  }
}

TEST(Mlp, HiddenActivationsStayInsideOpenUnitInterval) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = oracle::random_net(kAxisNet, rng);
    std::vector<double> x(9);
    for (double& v : x) v = u(rng);
    for (const auto& layer : m.hidden_activations(x)) {
      for (double a : layer) {
        EXPECT_GT(a, -1.0);
        EXPECT_LT(a, 1.0);
      }
    }
  }
}

TEST(Mlp, MseExamples) {
  EXPECT_EQ(mse(std::vector<double>{1, 2}, std::vector<double>{1, 2}), 0.0);
  EXPECT_EQ(mse(std::vector<double>{2}, std::vector<double>{0}), 4.0);
  EXPECT_EQ(mse(std::vector<double>{1, 3}, std::vector<double>{0, 0}), 5.0);
  EXPECT_THROW(mse(std::vector<double>{1}, std::vector<double>{1, 2}), Error);
  EXPECT_THROW(mse(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST(Mlp, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(99);
  for (const auto& spec : {kAxisNet, LayerSpec{{3, 4, 1}}, LayerSpec{{2, 3, 3, 2, 1}}}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto m = oracle::random_net(spec, rng);
      const auto batch = oracle::random_batch(rng, spec.inputs(), 8);
      const auto check = oracle::check_gradients(m, batch, 1e-3, 1e-6, 1e-8);
      EXPECT_EQ(check.failed, 0u) << "worst relative " << check.worst_relative;
    }
  }
}

TEST(Mlp, ZeroResidualGivesZeroGradient) {
  std::mt19937_64 rng(12);
  const auto m = oracle::random_net(kAxisNet, rng);
  auto batch = oracle::random_batch(rng, 9, 6);
  for (std::size_t i = 0; i < batch.size(); ++i) batch.targets[i] = m.forward(batch.row(i));
  const auto g = gradients(m, batch);
  for (const auto& w : g.weights)
    for (double v : w.data) EXPECT_EQ(v, 0.0);
  for (const auto& b : g.biases)
    for (double v : b) EXPECT_EQ(v, 0.0);
}

TEST(Mlp, LinearNeuronClosedForm) {
  // The output neuron of a 1-1-1 net is a single linear neuron fed by the
  // hidden activation h, so its weight gradient is 2(wh + b - y)h.
  Layer hidden{Matrix(1, 1), {0.0}}, out{Matrix(1, 1), {0.3}};
  hidden.weights(0, 0) = 0.8;
  out.weights(0, 0) = 1.7;
  const auto m = Mlp::from_parameters(LayerSpec{{1, 1, 1}}, {hidden, out});
  Samples s;
  s.push_back(std::vector<double>{0.5}, 2.0);
  const double h = std::tanh(0.8 * 0.5);
  const auto g = gradients(m, s);
  EXPECT_NEAR(g.weights[1].data[0], 2.0 * (1.7 * h + 0.3 - 2.0) * h, 1e-14);
  EXPECT_NEAR(g.biases[1][0], 2.0 * (1.7 * h + 0.3 - 2.0), 1e-14);
}

TEST(Mlp, SmallPlainStepDecreasesLoss) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = oracle::random_net(kAxisNet, rng);
    const auto batch = oracle::random_batch(rng, 9, 16);
    const double before = batch_mse(m, batch);
    auto velocity = m.zeros_like();
    momentum_step(m, gradients(m, batch), velocity, 1e-3, 0.0);
    EXPECT_LT(batch_mse(m, batch), before);
  }
}

Samples line_samples(double slope, int count, double offset = 0.0) {
  Samples s;
  for (int i = 0; i < count; ++i) {
    const double x = -1.0 + 2.0 * i / (count - 1);
    s.push_back(std::vector<double>{x}, slope * x * 0.4 + offset);
  }
  return s;
}

TEST(Training, LearnsALine) {
  const auto train_set = line_samples(2.0, 21);
  TrainConfig cfg;
  cfg.max_epochs = 5000;
  cfg.patience = 5000;
  const auto init = Mlp::init(LayerSpec{{1, 5, 1}}, 42);
  const auto r = train(init, train_set, line_samples(2.0, 7), cfg);
  // Plain gradient descent creeps along the last digits; a thousandfold drop
  // is what separates learning from noise here.
  EXPECT_LT(batch_mse(r.model, train_set), 1e-3 * batch_mse(init, train_set));
  EXPECT_LT(batch_mse(r.model, train_set), 5e-4);
}

TEST(Training, EarlyStopsOnMismatchedValidation) {
  TrainConfig cfg;
  cfg.patience = 10;
  cfg.max_epochs = 3000;
  const auto r = train(Mlp::init(LayerSpec{{1, 5, 1}}, 42), line_samples(2.0, 21), line_samples(-2.0, 9, 0.3), cfg);
  EXPECT_LT(r.report.stopped_epoch, cfg.max_epochs);
  EXPECT_LE(r.report.best_epoch, r.report.stopped_epoch);
  EXPECT_EQ(r.report.train_mse.size(), r.report.stopped_epoch);
}

TEST(Training, HugeLearningRateDiverges) {
  TrainConfig cfg;
  cfg.learning_rate = 1e3;
  try {
    train(Mlp::init(LayerSpec{{1, 5, 1}}, 42), line_samples(2.0, 21), line_samples(2.0, 5), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DivergenceDetected);
  }
}

TEST(Training, EmptySetsRejected) {
  EXPECT_THROW(train(Mlp::init(LayerSpec{{1, 5, 1}}, 1), Samples{}, line_samples(1, 3), TrainConfig{}), Error);
  EXPECT_THROW(train(Mlp::init(LayerSpec{{1, 5, 1}}, 1), line_samples(1, 3), Samples{}, TrainConfig{}), Error);
}

TEST(Training, Deterministic) {
  std::mt19937_64 rng(5);
  const auto a_set = oracle::random_batch(rng, 9, 40);
  const auto v_set = oracle::random_batch(rng, 9, 10);
  TrainConfig cfg;
  cfg.max_epochs = 300;
  const auto a = train(Mlp::init(kAxisNet, 7), a_set, v_set, cfg);
  const auto b = train(Mlp::init(kAxisNet, 7), a_set, v_set, cfg);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.report.train_mse, b.report.train_mse);
  EXPECT_EQ(a.report.validation_mse, b.report.validation_mse);
  EXPECT_EQ(a.report.best_epoch, b.report.best_epoch);
}

TEST(Serialization, RoundTripPreservesOutputs) {
  std::mt19937_64 rng(77);
  auto m = oracle::random_net(kAxisNet, rng);
  Normalization n;
  for (int i = 0; i < 9; ++i) n.features.push_back(AffineMap::fit(-100.0 * (i + 1), 50.0 * i));
  n.features[4] = AffineMap::fit(3, 3);
  n.target = AffineMap::fit(-3000, 2500);
  m.set_normalization(n);
  const auto back = io::parse_model(io::model_text(m));
  EXPECT_EQ(back, m);
  std::uniform_real_distribution<double> u(-500, 500);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(9);
    for (double& v : x) v = u(rng);
    EXPECT_EQ(back.predict(x), m.predict(x));
  }
  EXPECT_EQ(io::model_text(back), io::model_text(m));
}

ErrorKind parse_error(const std::string& text) {
  try {
    io::parse_model(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

TEST(Serialization, CorruptFiles) {
  auto m = Mlp::init(kAxisNet, 3);
  Normalization n;
  n.features.assign(9, AffineMap::fit(-1, 1));
  m.set_normalization(n);
  const std::string text = io::model_text(m);
  EXPECT_EQ(parse_error(text.substr(0, text.size() / 2)), ErrorKind::CorruptModel);
  EXPECT_EQ(parse_error(""), ErrorKind::CorruptModel);

  // Tamper with a weight but keep the old checksum.
  auto j = nlohmann::json::parse(text);
  j["weights"][0][0][0] = 0.123;
  EXPECT_EQ(parse_error(j.dump()), ErrorKind::CorruptModel);

  // Declared spec disagreeing with the matrices, checksum recomputed so only
  // the shape check can catch it.
  auto body = nlohmann::json::parse(text);
  body.erase("checksum");
  body["spec"] = {9, 6, 10, 1};
  body["checksum"] = io::crc32_hex(body.dump());
  EXPECT_EQ(parse_error(body.dump()), ErrorKind::CorruptModel);
}

}  // namespace
