#include <gtest/gtest.h>

#include <cmath>

#include "hjg/problem.hpp"
#include "support.hpp"

namespace {

using hjg::Vector;

TEST(Problem, WaterDynamicsWithOutflow) {
  const auto spec = hjg::builtin_water_system();
  const Vector x{4.0, 2.0}, a{1.0}, b{0.0};
  const auto f = hjg::eval_dynamics(spec, 0.0, x, a, b);
  const double r = std::sqrt(2.0 * 9.81 * 4.0);
  EXPECT_NEAR(f[0], -8.8589, 1e-4);
  EXPECT_NEAR(f[1], 3.4294, 1e-4);
  EXPECT_DOUBLE_EQ(f[0], -r);
  EXPECT_DOUBLE_EQ(f[1], 0.5 * r - 1.0);
}

TEST(Problem, WaterDynamicsRainOnly) {
  const auto spec = hjg::builtin_water_system();
  const auto f = hjg::eval_dynamics(spec, 0.0, Vector{4.0, 2.0}, Vector{0.0}, Vector{10.0});
  EXPECT_DOUBLE_EQ(f[0], 10.0);
  EXPECT_DOUBLE_EQ(f[1], -1.0);
}

TEST(Problem, WaterCostsAndConstraint) {
  const auto spec = hjg::builtin_water_system();
  EXPECT_DOUBLE_EQ(spec.constraint(0.0, Vector{2.6, 2.0}), -1.0);
  EXPECT_DOUBLE_EQ(spec.terminal_cost(0.0, Vector{10.0, 4.0}), 10.0);
  EXPECT_DOUBLE_EQ(spec.stage_cost(0.0, Vector{10.0, 4.0}, Vector{1.0}, Vector{3.0}), 0.0);
  EXPECT_EQ(spec.controls_a, (hjg::ControlBox{{0.0}, {1.0}}));
  EXPECT_EQ(spec.controls_b, (hjg::ControlBox{{0.0}, {10.0}}));
  EXPECT_TRUE(spec.time_invariant);
  EXPECT_TRUE(static_cast<bool>(spec.analytic_hamiltonian));
}

TEST(Problem, SmoothedOutflowMatchesAtOne) {
  const double left = 4.82 * std::sin(1.17);
  const double right = std::sqrt(2.0 * 9.81);
  EXPECT_NEAR(left, 4.4380, 1e-4);
  EXPECT_NEAR(right, 4.4294, 1e-4);
  EXPECT_LT(std::abs(left - right) / right, 0.002);
  // The coefficient itself is continuous to the same tolerance.
  const double below = hjg::water::outflow_rate(1.0 - 1e-12);
  const double above = hjg::water::outflow_rate(1.0);
  EXPECT_LT(std::abs(below - above) / above, 0.002);
}

TEST(Problem, ToyEvaluators) {
  const auto spec = hjg::builtin_toy_1d();
  EXPECT_DOUBLE_EQ(hjg::eval_dynamics(spec, 0.0, Vector{0.0}, Vector{1.0}, Vector{-0.5})[0], 0.5);
  EXPECT_DOUBLE_EQ(spec.stage_cost(0.0, Vector{2.0}, Vector{0.0}, Vector{0.0}), 4.0);
  EXPECT_DOUBLE_EQ(spec.constraint(0.0, Vector{2.5}), 0.5);
  EXPECT_DOUBLE_EQ(spec.terminal_cost(0.0, Vector{-1.5}), 2.25);
}

TEST(Problem, FrozenDynamicsAreZero) {
  const auto spec = hjg::builtin_frozen(2);
  const auto f = hjg::eval_dynamics(spec, 0.3, Vector{0.7, -0.2}, Vector{0.5}, Vector{-1.0});
  EXPECT_EQ(f, (Vector{0.0, 0.0}));
}

TEST(Problem, ControlOutsideBoxIsDomainError) {
  const auto spec = hjg::builtin_water_system();
  EXPECT_THROW(hjg::eval_dynamics(spec, 0.0, Vector{4.0, 2.0}, Vector{1.5}, Vector{0.0}), hjg::DomainError);
  EXPECT_THROW(hjg::eval_dynamics(spec, 0.0, Vector{4.0, 2.0}, Vector{0.5}, Vector{-1.0}), hjg::DomainError);
  EXPECT_THROW(hjg::eval_dynamics(spec, 0.0, Vector{4.0}, Vector{0.5}, Vector{1.0}), hjg::DomainError);
}

TEST(Problem, NonFiniteDynamicsIsEvaluationError) {
  auto spec = hjg::builtin_toy_1d();
  spec.dynamics = [](double, std::span<const double>, std::span<const double>, std::span<const double>,
                     std::span<double> out) { out[0] = std::nan(""); };
  EXPECT_THROW(hjg::eval_dynamics(spec, 0.0, Vector{0.0}, Vector{0.0}, Vector{0.0}), hjg::EvaluationError);
}

TEST(Problem, ValidateRejectsBadBoxes) {
  auto spec = hjg::builtin_toy_1d();
  spec.controls_a = {{1.0}, {-1.0}};
  EXPECT_THROW(hjg::validate(spec), hjg::ConfigError);
  spec = hjg::builtin_toy_1d();
  spec.horizon = 0.0;
  EXPECT_THROW(hjg::validate(spec), hjg::ConfigError);
  spec = hjg::builtin_toy_1d();
  spec.controls_b = {{}, {}};
  EXPECT_THROW(hjg::validate(spec), hjg::ConfigError);
}

TEST(Problem, OptCtrlNominalIsMidpoint) {
  EXPECT_EQ(hjg::nominal_b(hjg::builtin_water_system()), (Vector{5.0}));
  EXPECT_EQ(hjg::nominal_b(hjg::builtin_toy_1d()), (Vector{0.0}));
}

TEST(Problem, BuiltinLookup) {
  EXPECT_EQ(hjg::builtin_problem("water2d").name, "water2d");
  EXPECT_EQ(hjg::builtin_problem("toy1d").state_dim, 1u);
  EXPECT_THROW(hjg::builtin_problem("nope"), hjg::ConfigError);
}

// Property: evaluators are finite on the grid box x control boxes.
TEST(ProblemProperty, EvaluatorsFiniteOnDomain) {
  hjg::test::Random rng(11);
  for (const auto& spec : {hjg::builtin_water_system(), hjg::builtin_toy_1d()}) {
    const bool water = spec.name == "water2d";
    for (int s = 0; s < 2000; ++s) {
      Vector x = water ? Vector{rng.uniform(0.0, 16.0), rng.uniform(0.5, 5.5)} : Vector{rng.uniform(-3.0, 3.0)};
      Vector a{rng.uniform(spec.controls_a.lower[0], spec.controls_a.upper[0])};
      Vector b{rng.uniform(spec.controls_b.lower[0], spec.controls_b.upper[0])};
      const double t = rng.uniform(0.0, spec.horizon);
      const auto f = hjg::eval_dynamics(spec, t, x, a, b);
      for (double v : f) ASSERT_TRUE(std::isfinite(v));
      ASSERT_TRUE(std::isfinite(spec.stage_cost(t, x, a, b)));
      ASSERT_TRUE(std::isfinite(spec.terminal_cost(t, x)));
      ASSERT_TRUE(std::isfinite(spec.constraint(t, x)));
    }
  }
}

TEST(ProblemProperty, TimeInvarianceProbe) {
  const auto water = hjg::builtin_water_system();
  EXPECT_TRUE(hjg::probe_time_invariance(water, Vector{0.0, 0.5}, Vector{16.0, 5.5}));
  const auto toy = hjg::builtin_toy_1d();
  EXPECT_TRUE(hjg::probe_time_invariance(toy, Vector{-3.0}, Vector{3.0}));

  auto timed = hjg::builtin_toy_1d();
  timed.stage_cost = [](double t, std::span<const double> x, std::span<const double>, std::span<const double>) {
    return x[0] * x[0] + t;
  };
  EXPECT_FALSE(hjg::probe_time_invariance(timed, Vector{-3.0}, Vector{3.0}));
}

}  // namespace
