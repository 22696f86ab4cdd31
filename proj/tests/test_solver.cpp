#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <tuple>

#include "hjg/oracle.hpp"
#include "hjg/solver.hpp"
#include "support.hpp"

namespace {

using hjg::EquationVariant;
using hjg::PlayerMode;
using hjg::ScalarField;
using hjg::ValueFunction;
using hjg::Vector;

// Round-off slack for comparisons between independently computed nodes.
constexpr double kInvariantSlack = 1e-9;

// WENO5 is not a monotone scheme, so z-monotonicity and the z-Lipschitz
// bound hold only up to its overshoot. Measured worst on toy1d: 6.5e-3,
// about 0.025 dz.
constexpr double kWenoZOvershoot = 0.1;  // in units of dz

const ValueFunction& toy_solution(EquationVariant v, PlayerMode m,
                                  hjg::DerivativeOrder order = hjg::DerivativeOrder::WENO5) {
  static std::map<std::tuple<int, int, int>, ValueFunction> cache;
  const auto key = std::make_tuple(static_cast<int>(v), static_cast<int>(m), static_cast<int>(order));
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto opt = hjg::test::toy_scheme();
    opt.derivative_order = order;
    it = cache
             .emplace(key, hjg::solve(hjg::builtin_toy_1d(), hjg::test::toy_grid(), v, m, opt,
                                      hjg::SnapshotPolicy{51, {}}))
             .first;
  }
  return it->second;
}

// Largest increase in z and largest excess of the downward z-slope over 1,
// across all stamps and nodes.
std::pair<double, double> z_violations(const ValueFunction& vf) {
  const auto& g = vf.grid;
  const std::size_t nz = g.z_axis.count;
  const double dz = g.z_axis.spacing();
  double worst_increase = 0.0, worst_slope = 0.0;
  for (const auto& snap : vf.snapshots)
    for (std::size_t s = 0; s < g.state_point_count(); ++s)
      for (std::size_t j = 0; j + 1 < nz; ++j) {
        const double lo = snap.values[s * nz + j], hi = snap.values[s * nz + j + 1];
        worst_increase = std::max(worst_increase, hi - lo);
        worst_slope = std::max(worst_slope, (lo - hi) - dz);
      }
  return {worst_increase, worst_slope};
}

TEST(StepUpdate, Examples) {
  EXPECT_EQ(hjg::step_update(EquationVariant::P1TimeVarying, -1.0, -2.0, -0.5, 1.0, 0.0), -0.5);
  EXPECT_EQ(hjg::step_update(EquationVariant::P2TimeVarying, -1.0, -2.0, -0.5, 1.0, 0.0), -1.0);
  EXPECT_EQ(hjg::step_update(EquationVariant::P1TimeInvariant, -1.0, 0.0, 0.3, 0.1, 2.0), 0.3);
  EXPECT_DOUBLE_EQ(hjg::step_update(EquationVariant::P1TimeInvariant, -1.0, 0.0, 0.3, 0.1, -2.0), 0.5);
  EXPECT_EQ(hjg::step_update(EquationVariant::P2TimeInvariant, -1.0, 0.0, 0.3, 0.1, -2.0), 0.3);
  EXPECT_DOUBLE_EQ(hjg::step_update(EquationVariant::P2TimeInvariant, -1.0, 0.0, 0.3, 0.1, 2.0), 0.1);
}

TEST(StepUpdateProperty, NonIncreasingInHamiltonian) {
  hjg::test::Random rng(31);
  for (auto v : hjg::test::kVariants) {
    for (int s = 0; s < 2000; ++s) {
      const double c = rng.uniform(-2, 1), gz = rng.uniform(-2, 2), vn = rng.uniform(-2, 2), dt = rng.uniform(0, 0.1);
      const double h1 = rng.uniform(-10, 10), h2 = h1 + rng.uniform(0, 5);
      ASSERT_GE(hjg::step_update(v, c, gz, vn, dt, h1), hjg::step_update(v, c, gz, vn, dt, h2));
      ASSERT_GE(hjg::step_update(v, c, gz, vn, dt, h1), c);
    }
  }
}

TEST(Terminal, WaterNodes) {
  const auto spec = hjg::builtin_water_system();
  const auto grid = hjg::build_grid({{2.6, 10.0, 2}, {2.0, 4.0, 2}}, {4.0, 6.0, 2}, 3);
  const auto f = hjg::terminal_condition(spec, grid);
  // (x1, x2, z) = (2.6, 2, 6) and (10, 4, 4).
  EXPECT_DOUBLE_EQ(f.values[1], -1.0);
  EXPECT_DOUBLE_EQ(f.values[6], 6.0);
}

TEST(Terminal, FrozenClosedForm) {
  const auto grid = hjg::test::toy_grid(7, 9);
  const auto f = hjg::terminal_condition(hjg::builtin_frozen(1), grid);
  for (std::size_t i = 0; i < f.values.size(); ++i)
    EXPECT_EQ(f.values[i], std::max(-1.0, -grid.z_axis.coord(i % 9)));
}

TEST(Solve, FrozenIsStationaryForEveryVariant) {
  const auto spec = hjg::builtin_frozen(2);
  const auto grid = hjg::build_grid({{-1.0, 1.0, 9}, {-1.0, 1.0, 7}}, {-2.0, 2.0, 11}, 3);
  const auto terminal = hjg::terminal_condition(spec, grid);
  for (auto v : hjg::test::kVariants)
    for (auto m : hjg::test::kModes) {
      const auto vf = hjg::solve(spec, grid, v, m, {}, hjg::SnapshotPolicy{11, {}});
      ASSERT_EQ(vf.snapshots.size(), 11u);
      for (const auto& snap : vf.snapshots) ASSERT_EQ(snap.values, terminal.values);
    }
}

TEST(Solve, DefaultSnapshotPolicyIs201Stamps) {
  const auto vf = hjg::solve(hjg::builtin_frozen(1), hjg::test::toy_grid(5, 5), EquationVariant::P1TimeVarying,
                             PlayerMode::Upper);
  ASSERT_EQ(vf.times.size(), 201u);
  EXPECT_EQ(vf.times.front(), 0.0);
  EXPECT_EQ(vf.times.back(), 1.0);
  EXPECT_EQ(vf.nearest_stamp(0.0025), 0u);  // tie goes to the earlier stamp
  EXPECT_EQ(vf.nearest_stamp(0.0026), 1u);
  EXPECT_THROW(vf.nearest_stamp(1.5), hjg::DomainError);
}

TEST(Solve, ExplicitStampsHonoured) {
  const auto vf = hjg::solve(hjg::builtin_toy_1d(), hjg::test::toy_grid(), EquationVariant::P1TimeVarying,
                             PlayerMode::Upper, hjg::test::toy_scheme(), hjg::SnapshotPolicy{0, {0.0, 0.3, 1.0}});
  EXPECT_EQ(vf.times, (Vector{0.0, 0.3, 1.0}));
  EXPECT_THROW(hjg::solve(hjg::builtin_toy_1d(), hjg::test::toy_grid(), EquationVariant::P1TimeVarying,
                          PlayerMode::Upper, hjg::test::toy_scheme(), hjg::SnapshotPolicy{0, {0.0, 0.7, 0.3, 1.0}}),
               hjg::ConfigError);
}

TEST(Solve, PreconditionErrors) {
  auto timed = hjg::builtin_toy_1d();
  timed.time_invariant = false;
  EXPECT_THROW(hjg::solve(timed, hjg::test::toy_grid(), EquationVariant::P1TimeInvariant, PlayerMode::Upper),
               hjg::ConfigError);
  const auto thin = hjg::build_grid({{-3.0, 3.0, 11}}, {0.0, 8.0, 11}, 1);
  EXPECT_THROW(hjg::solve(hjg::builtin_toy_1d(), thin, EquationVariant::P1TimeVarying, PlayerMode::Upper),
               hjg::ConfigError);
  hjg::SchemeOptions upwind;
  upwind.derivative_order = hjg::DerivativeOrder::Upwind1;
  EXPECT_NO_THROW(hjg::solve(hjg::builtin_toy_1d(), thin, EquationVariant::P1TimeVarying, PlayerMode::Upper, upwind,
                             hjg::SnapshotPolicy{3, {}}));
  EXPECT_THROW(hjg::solve(hjg::builtin_water_system(), hjg::test::toy_grid(), EquationVariant::P1TimeVarying,
                          PlayerMode::Upper),
               hjg::ConfigError);
}

TEST(Solve, BlowupReportsTime) {
  auto spec = hjg::builtin_frozen(1);
  spec.terminal_cost = [](double, std::span<const double>) { return 1e13; };
  try {
    hjg::solve(spec, hjg::test::toy_grid(5, 5), EquationVariant::P1TimeVarying, PlayerMode::Upper, {},
               hjg::SnapshotPolicy{5, {}});
    FAIL() << "expected blow-up";
  } catch (const hjg::NumericalBlowup& e) {
    EXPECT_DOUBLE_EQ(e.time(), 0.75);
  }
}

TEST(Solve, StatsReported) {
  hjg::SolveStats stats;
  hjg::solve(hjg::builtin_toy_1d(), hjg::test::toy_grid(), EquationVariant::P1TimeVarying, PlayerMode::Upper,
             hjg::test::toy_scheme(), hjg::SnapshotPolicy{51, {}}, &stats);
  EXPECT_GT(stats.steps, 50u);
  EXPECT_GT(stats.dt, 0.0);
  EXPECT_GE(stats.dissipation.alpha_x[0], 1.5);
  EXPECT_GE(stats.dissipation.alpha_z, 9.0);
}

TEST(Solve, TvdRk3MatchesEulerClosely) {
  hjg::SchemeOptions rk = hjg::test::toy_scheme();
  rk.integrator = hjg::Integrator::TVDRK3;
  const auto a = hjg::solve(hjg::builtin_toy_1d(), hjg::test::toy_grid(), EquationVariant::P1TimeVarying,
                            PlayerMode::Upper, rk, hjg::SnapshotPolicy{51, {}});
  const auto& b = toy_solution(EquationVariant::P1TimeVarying, PlayerMode::Upper);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.snapshots[0].values.size(); ++i)
    diff = std::max(diff, std::abs(a.snapshots[0].values[i] - b.snapshots[0].values[i]));
  EXPECT_LT(diff, 0.1);
}

// With f = 0, L = 1 and one control per player, Upwind1 with unit safety is
// exactly the semi-Lagrangian backup the oracle performs.
TEST(Solve, OneNodeSanityMatchesOracleExactly) {
  auto spec = hjg::builtin_frozen(1);
  spec.stage_cost = [](double, std::span<const double>, std::span<const double>, std::span<const double>) { return 1.0; };
  spec.terminal_cost = [](double, std::span<const double> x) { return 0.5 + x[0]; };
  spec.constraint = [](double, std::span<const double> x) { return -0.8 + 0.1 * x[0]; };
  spec.controls_a = {{0.0}, {0.0}};
  spec.controls_b = {{0.0}, {0.0}};
  const auto grid = hjg::build_grid({{0.0, 1.0, 2}}, {0.0, 4.0, 9}, 3);
  hjg::SchemeOptions opt;
  opt.derivative_order = hjg::DerivativeOrder::Upwind1;
  opt.cfl = 1.0;
  opt.safety = 1.0;
  for (auto v : hjg::test::kVariants)
    for (auto m : hjg::test::kModes) {
      const auto vf = hjg::solve(spec, grid, v, m, opt, hjg::SnapshotPolicy{11, {}});
      const auto table = hjg::oracle_solve(spec, grid, v, m, 2, 2, 11);
      for (std::size_t k = 0; k < 11; ++k)
        for (std::size_t i = 0; i < grid.point_count(); ++i)
          ASSERT_NEAR(vf.snapshots[k].values[i], table.values[k][i], 1e-12)
              << hjg::to_string(v) << " stamp " << k << " node " << i;
    }
}

// ---------------------------------------------------------------------------
// Invariant suite over every variant and mode on toy1d.

class ToyInvariants : public ::testing::TestWithParam<std::tuple<EquationVariant, PlayerMode>> {};

TEST_P(ToyInvariants, TerminalAndClampFloors) {
  const auto [variant, mode] = GetParam();
  const auto& vf = toy_solution(variant, mode);
  const auto spec = hjg::builtin_toy_1d();
  EXPECT_EQ(vf.snapshots.back().values, hjg::terminal_condition(spec, vf.grid).values);
  const auto& g = vf.grid;
  const std::size_t nz = g.z_axis.count;
  for (std::size_t k = 0; k < vf.times.size(); ++k) {
    for (std::size_t s = 0; s < g.state_point_count(); ++s) {
      const Vector x{g.state_axes[0].coord(s)};
      const double c = spec.constraint(vf.times[k], x);
      const double gx = spec.terminal_cost(vf.times[k], x);
      for (std::size_t j = 0; j < nz; ++j) {
        const double v = vf.snapshots[k].values[s * nz + j];
        ASSERT_GE(v, c);
        if (hjg::is_max_over_time(variant)) ASSERT_GE(v, gx - g.z_axis.coord(j) - 1e-12);
      }
    }
  }
}

// Exact for the monotone first-order scheme.
TEST_P(ToyInvariants, ZMonotoneAndLipschitzUpwind) {
  const auto [variant, mode] = GetParam();
  const auto [increase, slope] = z_violations(toy_solution(variant, mode, hjg::DerivativeOrder::Upwind1));
  EXPECT_LE(increase, kInvariantSlack);
  EXPECT_LE(slope, kInvariantSlack);
}

TEST_P(ToyInvariants, ZMonotoneAndLipschitzWenoOvershootBounded) {
  const auto [variant, mode] = GetParam();
  const auto& vf = toy_solution(variant, mode);
  const auto [increase, slope] = z_violations(vf);
  EXPECT_LE(increase, kWenoZOvershoot * vf.grid.z_axis.spacing());
  EXPECT_LE(slope, kWenoZOvershoot * vf.grid.z_axis.spacing());
}

TEST_P(ToyInvariants, P1DominatesP2) {
  const auto [variant, mode] = GetParam();
  if (!hjg::is_max_over_time(variant)) GTEST_SKIP() << "checked from the P1 side";
  const auto other = variant == EquationVariant::P1TimeVarying ? EquationVariant::P2TimeVarying
                                                               : EquationVariant::P2TimeInvariant;
  const auto& p1 = toy_solution(variant, mode);
  const auto& p2 = toy_solution(other, mode);
  for (std::size_t k = 0; k < p1.times.size(); ++k)
    for (std::size_t i = 0; i < p1.grid.point_count(); ++i)
      ASSERT_GE(p1.snapshots[k].values[i], p2.snapshots[k].values[i] - kInvariantSlack);
}

TEST_P(ToyInvariants, LowerBelowUpper) {
  const auto [variant, mode] = GetParam();
  if (mode != PlayerMode::Upper) GTEST_SKIP() << "checked from the Upper side";
  const auto& up = toy_solution(variant, PlayerMode::Upper);
  const auto& lo = toy_solution(variant, PlayerMode::Lower);
  for (std::size_t k = 0; k < up.times.size(); ++k)
    for (std::size_t i = 0; i < up.grid.point_count(); ++i)
      ASSERT_LE(lo.snapshots[k].values[i], up.snapshots[k].values[i] + kInvariantSlack);
}

TEST_P(ToyInvariants, P1TimeInvariantBackwardMonotone) {
  const auto [variant, mode] = GetParam();
  if (variant != EquationVariant::P1TimeInvariant) GTEST_SKIP();
  const auto& vf = toy_solution(variant, mode);
  for (std::size_t k = 0; k + 1 < vf.times.size(); ++k)
    for (std::size_t i = 0; i < vf.grid.point_count(); ++i)
      ASSERT_GE(vf.snapshots[k].values[i], vf.snapshots[k + 1].values[i]);
}

INSTANTIATE_TEST_SUITE_P(AllVariantsModes, ToyInvariants,
                         ::testing::Combine(::testing::ValuesIn(hjg::test::kVariants),
                                            ::testing::ValuesIn(hjg::test::kModes)),
                         [](const auto& info) {
                           return std::string(hjg::to_string(std::get<0>(info.param))) +
                                  hjg::to_string(std::get<1>(info.param));
                         });

TEST(SolverProperty, TimeInvariantPairsAgreeOnToy) {
  for (auto m : hjg::test::kModes) {
    for (auto [a, b] : {std::pair{EquationVariant::P1TimeVarying, EquationVariant::P1TimeInvariant},
                        std::pair{EquationVariant::P2TimeVarying, EquationVariant::P2TimeInvariant}}) {
      const auto& va = toy_solution(a, m);
      const auto& vb = toy_solution(b, m);
      double diff = 0.0;
      for (std::size_t i = 0; i < va.grid.point_count(); ++i) {
        const double x = va.snapshots[0].values[i], y = vb.snapshots[0].values[i];
        if (std::abs(x) <= 5.0) diff = std::max(diff, std::abs(x - y));
      }
      EXPECT_LE(diff, 0.3) << hjg::to_string(a) << " " << hjg::to_string(m);
    }
  }
}

// Lemma 2 style check: the solver's V(t_k) is close to one discrete backup
// of its own V(t_{k+1}).
TEST(SolverProperty, OneStepDynamicProgramming) {
  const auto spec = hjg::builtin_toy_1d();
  const auto& vf = toy_solution(EquationVariant::P1TimeVarying, PlayerMode::Upper);
  const auto& g = vf.grid;
  const auto lat = hjg::make_lattices(spec, PlayerMode::Upper, 5, 5);
  double worst = 0.0;
  for (std::size_t k : {0u, 10u, 25u, 49u}) {
    const double t = vf.times[k], h = vf.times[k + 1] - t;
    for (std::size_t i = 0; i < g.point_count(); ++i) {
      Vector p(2);
      g.node_coords(i, p);
      if (std::abs(p[0]) > 2.4 || p[1] < 0.5 || p[1] > 7.5) continue;
      double best = 1e300;
      for (std::size_t a = 0; a < lat.a.size(); ++a) {
        double reply = -1e300;
        for (std::size_t b = 0; b < lat.b.size(); ++b) {
          const double xa = lat.a.point(a)[0], xb = lat.b.point(b)[0];
          const Vector q{p[0] + h * (xa + xb), p[1] - h * p[0] * p[0]};
          reply = std::max(reply, hjg::interpolate_values(g, vf.snapshots[k + 1].values, q, true));
        }
        best = std::min(best, reply);
      }
      const double backup = std::max({std::abs(p[0]) - 2.0, p[0] * p[0] - p[1], best});
      worst = std::max(worst, std::abs(backup - vf.snapshots[k].values[i]));
    }
  }
  EXPECT_LE(worst, 0.05);
}

}  // namespace
