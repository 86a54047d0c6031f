#include <gtest/gtest.h>

#include <cmath>

#include "cycletime/pockets.hpp"
#include "cycletime/simulator.hpp"
#include "oracles/trapezoid.hpp"
#include "physics.hpp"
#include "support.hpp"

namespace {

using namespace cycletime;
using namespace cycletime::sim;
using cycletime::testing::fixture_text;
using cycletime::testing::path_of;
using cycletime::testing::square_path;

MachineLimits with_accel(double a) {
  MachineLimits l;
  l.max_acceleration = {a, a, a};
  return l;
}

std::vector<gcode::Toolpath> fixture_paths() {
  std::vector<gcode::Toolpath> out;
  out.push_back(gcode::parse_nc_program(fixture_text("square5.nc"), 30000, "square5"));
  out.push_back(gcode::parse_nc_program(fixture_text("pocket_demo.nc"), 30000, "pocket_demo"));
  out.push_back(square_path(40, 3000, 2));
  out.push_back(path_of({{0, 0, 0, 3000}, {30, 0, 0, 3000}, {0, 0, 0, 3000}, {0, 20, 0, 2000}}, "reversal"));
  for (const auto& p : pockets::standard_suite()) {
    out.push_back(gcode::parse_nc_program(pockets::pocket_program(p), 30000, p.name));
  }
  return out;
}

TEST(CornerSpeed, Examples) {
  EXPECT_EQ(corner_speed_limit(-1, 3000, 1), 3000);
  EXPECT_EQ(corner_speed_limit(1, 3000, 1), 0);
  EXPECT_EQ(corner_speed_limit(1, 12345, 2.5), 0);
  EXPECT_EQ(corner_speed_limit(0, 3000, 1), 1500);
}

TEST(Simulator, HundredMillimetreTrapezoid) {
  const auto tp = path_of({{0, 0, 0, 3000}, {100, 0, 0, 3000}});
  const auto traj = plan_profile(tp, with_accel(500));
  const auto ref = oracle::rest_to_rest(100, 50, 500);
  ASSERT_EQ(traj.segments.size(), 1u);
  EXPECT_NEAR(traj.segments[0].accel_time, 0.1, 1e-12);
  EXPECT_NEAR(ref.total_time, 2.1, 1e-12);
  EXPECT_NEAR(measured_cycle_time(traj), ref.total_time, 1e-12);
  EXPECT_NEAR(traj.final_position.x, 100, 1e-12);
  EXPECT_NEAR(traj.state_at(traj.total_time).position.x, 100, 1e-9);

  const auto log = emit_telemetry(traj, with_accel(500));
  ASSERT_EQ(log.samples.size(), 11u);
  for (std::size_t k = 0; k < 11; ++k) EXPECT_NEAR(log.samples[k].t, 0.2 * k, 1e-12);
}

TEST(Simulator, TriangularProfilesMatchClosedForm) {
  for (double len : {1.0, 2.5, 4.0}) {
    const auto traj = plan_profile(path_of({{0, 0, 0, 3000}, {0, len, 0, 3000}}), with_accel(500));
    const auto ref = oracle::rest_to_rest(len, 50, 500);
    EXPECT_NEAR(traj.total_time, ref.total_time, 1e-12);
    EXPECT_NEAR(traj.segments[0].peak_speed, ref.peak_speed, 1e-12);
  }
}

TEST(Simulator, SquareCornersRunAtTheCornerLimit) {
  const auto tp = square_path(100, 3000);
  const auto traj = plan_profile(tp, with_accel(300));
  for (std::size_t k = 0; k + 1 < traj.segments.size(); ++k) {
    EXPECT_NEAR(traj.segments[k].exit_speed * 60.0, corner_speed_limit(0.0, 3000, 1.0), 1e-6);
  }
}

TEST(Simulator, ShortRapidNeverReachesRapidRate) {
  gcode::Toolpath tp = path_of({{0, 0, 0, 30000}, {10, 0, 0, 30000}});
  tp.locations[1].mode = gcode::MotionMode::Rapid;
  auto limits = with_accel(500);
  limits.max_feedrate = {40000, 40000, 40000};
  const auto traj = plan_profile(tp, limits);
  EXPECT_LT(traj.segments[0].peak_speed * 60.0, 30000);
}

TEST(Simulator, PhysicsHoldsOnFixtures) {
  for (const auto& tp : fixture_paths()) {
    for (double gamma : {0.5, 1.0, 2.0}) {
      auto limits = MachineLimits{};
      limits.corner_exponent = gamma;
      const auto v = physics::check(tp, limits);
      EXPECT_EQ(v.feed_ceiling, 0u) << tp.source_name;
      EXPECT_EQ(v.axis_ceiling, 0u) << tp.source_name;
      EXPECT_EQ(v.continuity, 0u) << tp.source_name;
      EXPECT_EQ(v.reversal, 0u) << tp.source_name;
      EXPECT_EQ(v.acceleration, 0u) << tp.source_name;
      EXPECT_EQ(v.cam_bound, 0u) << tp.source_name;
    }
  }
}

TEST(Simulator, ReversalStops) {
  const auto tp = path_of({{0, 0, 0, 3000}, {30, 0, 0, 3000}, {0, 0, 0, 3000}});
  const auto traj = plan_profile(tp, MachineLimits{});
  EXPECT_LT(traj.segments[0].exit_speed * 60.0, 1e-6);
}

TEST(Simulator, MoreAccelerationNeverSlower) {
  for (const auto& tp : fixture_paths()) {
    double a = 50.0;
    double prev = plan_profile(tp, with_accel(a)).total_time;
    for (int i = 0; i < 5; ++i) {
      a *= 2.0;
      const double t = plan_profile(tp, with_accel(a)).total_time;
      EXPECT_LE(t, prev + 1e-12) << tp.source_name;
      prev = t;
    }
  }
}

TEST(Simulator, CornersMakeTheMachineSlowerThanCam) {
  for (const auto& tp : fixture_paths()) {
    if (!physics::has_corner(tp)) continue;
    EXPECT_GT(measured_cycle_time(plan_profile(tp, MachineLimits{})), predictor::cam_baseline_time(tp))
        << tp.source_name;
  }
}

TEST(Simulator, TelemetrySampling) {
  const auto tp = gcode::parse_nc_program(fixture_text("pocket_demo.nc"));
  MachineLimits clean;
  const auto traj = plan_profile(tp, clean);
  const auto log = emit_telemetry(traj, clean);
  for (const auto& s : log.samples) {
    const auto exact = traj.state_at(s.t);
    EXPECT_EQ(s.velocity, exact.velocity);
    EXPECT_EQ(s.position, exact.position);
  }
  MachineLimits noisy;
  noisy.noise_stddev = 10;
  noisy.seed = 5;
  const auto a = emit_telemetry(traj, noisy);
  const auto b = emit_telemetry(traj, noisy);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].velocity, b.samples[i].velocity);
    EXPECT_EQ(a.samples[i].position, log.samples[i].position);
    differs = differs || !(a.samples[i].velocity == log.samples[i].velocity);
  }
  EXPECT_TRUE(differs);
}

TEST(Simulator, DenseSeriesAtOneKilohertz) {
  const auto traj = plan_profile(path_of({{0, 0, 0, 3000}, {100, 0, 0, 3000}}), with_accel(500));
  ASSERT_EQ(traj.dense.size(), 2101u);
  EXPECT_NEAR(traj.dense[1].t, 0.001, 1e-15);
}

TEST(Simulator, DegenerateInputs) {
  const auto one = path_of({{1, 2, 3, 1000}});
  EXPECT_EQ(measured_cycle_time(plan_profile(one, MachineLimits{})), 0.0);
  EXPECT_EQ(measured_cycle_time(plan_profile(gcode::Toolpath{}, MachineLimits{})), 0.0);
  MachineLimits bad;
  bad.max_acceleration.y = 0;
  try {
    plan_profile(square_path(10, 1000), bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidLimits);
  }
}

}  // namespace
