#ifndef HJG_PROBLEM_HPP
#define HJG_PROBLEM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hjg/errors.hpp"

namespace hjg {

using Vector = std::vector<double>;

/// Axis-aligned control set [lower, upper] in R^m.
struct ControlBox {
  Vector lower;
  Vector upper;

  std::size_t dim() const noexcept { return lower.size(); }

  void validate(const std::string& label) const {
    if (lower.empty() || lower.size() != upper.size())
      throw ConfigError(label + ": control box bounds must be non-empty and of equal length");
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || lower[i] > upper[i])
        throw ConfigError(label + ": control box requires finite lower[i] <= upper[i]");
    }
  }

  bool contains(std::span<const double> u) const {
    if (u.size() != dim()) return false;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double slack = 1e-12 * (1.0 + std::abs(lower[i]) + std::abs(upper[i]));
      if (!(u[i] >= lower[i] - slack && u[i] <= upper[i] + slack)) return false;
    }
    return true;
  }

  Vector midpoint() const {
    Vector m(dim());
    for (std::size_t i = 0; i < dim(); ++i) m[i] = 0.5 * (lower[i] + upper[i]);
    return m;
  }

  bool operator==(const ControlBox&) const = default;
};

/// Which value the solver computes: the upper value V+ (player A commits
/// first at each instant), the lower value V- (player B first), or the
/// single-player optimal-control reduction where B is pinned to the
/// midpoint of its box.
enum class PlayerMode { Upper, Lower, OptCtrl };

inline const char* to_string(PlayerMode m) {
  switch (m) {
    case PlayerMode::Upper: return "Upper";
    case PlayerMode::Lower: return "Lower";
    case PlayerMode::OptCtrl: return "OptCtrl";
  }
  return "?";
}

// Evaluator signatures. Dynamics writes into `out` (length state_dim) so the
// hot loops do not allocate.
using DynamicsFn = std::function<void(double t, std::span<const double> x, std::span<const double> a,
                                      std::span<const double> b, std::span<double> out)>;
using StageCostFn = std::function<double(double t, std::span<const double> x, std::span<const double> a,
                                         std::span<const double> b)>;
using StateFn = std::function<double(double t, std::span<const double> x)>;
using HamiltonianFn = std::function<double(double t, std::span<const double> x, double z,
                                           std::span<const double> p, double q, PlayerMode mode)>;

/// A state-constrained zero-sum game with free terminal time.
///
/// Evaluators must be pure: the solver calls them concurrently. Lipschitz
/// continuity, compact/convex velocity sets and lower-bounded costs are the
/// caller's obligation and are not checked.
struct ProblemSpec {
  std::string name;
  std::size_t state_dim = 0;
  DynamicsFn dynamics;
  StageCostFn stage_cost;
  StateFn terminal_cost;
  StateFn constraint;
  ControlBox controls_a;
  ControlBox controls_b;
  double horizon = 1.0;
  bool time_invariant = false;
  HamiltonianFn analytic_hamiltonian;  // empty: use control-lattice enumeration
};

inline void validate(const ProblemSpec& spec) {
  if (spec.state_dim == 0) throw ConfigError(spec.name + ": state_dim must be positive");
  if (!spec.dynamics || !spec.stage_cost || !spec.terminal_cost || !spec.constraint)
    throw ConfigError(spec.name + ": dynamics, stage_cost, terminal_cost and constraint are required");
  spec.controls_a.validate(spec.name + ".controls_a");
  spec.controls_b.validate(spec.name + ".controls_b");
  if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon))
    throw ConfigError(spec.name + ": horizon must be positive and finite");
}

/// Player B's control in the optimal-control reduction.
inline Vector nominal_b(const ProblemSpec& spec) { return spec.controls_b.midpoint(); }

/// f(t, x, a, b) with argument and output checks.
inline Vector eval_dynamics(const ProblemSpec& spec, double t, std::span<const double> x,
                            std::span<const double> a, std::span<const double> b) {
  if (x.size() != spec.state_dim) throw DomainError("eval_dynamics: state has wrong dimension");
  if (!spec.controls_a.contains(a)) throw DomainError("eval_dynamics: control a outside its box");
  if (!spec.controls_b.contains(b)) throw DomainError("eval_dynamics: control b outside its box");
  Vector out(spec.state_dim);
  spec.dynamics(t, x, a, b, out);
  for (double v : out)
    if (!std::isfinite(v)) throw EvaluationError("eval_dynamics: non-finite dynamics output");
  return out;
}

/// Probes that every evaluator gives identical output at t=0 and t=T/2 on
/// `samples` random (x, a, b) drawn from the state box [lo, hi] and the
/// control boxes.
inline bool probe_time_invariance(const ProblemSpec& spec, std::span<const double> lo,
                                  std::span<const double> hi, int samples = 100,
                                  std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  auto draw = [&](double l, double h) { return std::uniform_real_distribution<double>(l, h)(rng); };
  const double t1 = 0.0, t2 = 0.5 * spec.horizon;
  Vector x(spec.state_dim), a(spec.controls_a.dim()), b(spec.controls_b.dim());
  Vector f1(spec.state_dim), f2(spec.state_dim);
  for (int s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = draw(lo[i], hi[i]);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = draw(spec.controls_a.lower[i], spec.controls_a.upper[i]);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = draw(spec.controls_b.lower[i], spec.controls_b.upper[i]);
    spec.dynamics(t1, x, a, b, f1);
    spec.dynamics(t2, x, a, b, f2);
    if (f1 != f2) return false;
    if (spec.stage_cost(t1, x, a, b) != spec.stage_cost(t2, x, a, b)) return false;
    if (spec.terminal_cost(t1, x) != spec.terminal_cost(t2, x)) return false;
    if (spec.constraint(t1, x) != spec.constraint(t2, x)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Built-in problems

namespace water {

inline constexpr double kGravity = 9.81;

/// Outflow coefficient sqrt(2 g x1), replaced below x1 = 1 by the Lipschitz
/// sinusoid 4.82 sin(1.17 x1), which matches value and slope at x1 = 1.
inline double outflow_rate(double x1) {
  if (x1 >= 1.0) return std::sqrt(2.0 * kGravity * x1);
  return 4.82 * std::sin(1.17 * x1);
}

}  // namespace water

/// Two ponds: player A opens the outflow of pond 1 into pond 2, player B is
/// precipitation on pond 1. Cost is the highest level of pond 1 over [0, 1];
/// pond 1 must stay in [0, 15] and pond 2 in [1, 5].
inline ProblemSpec builtin_water_system() {
  ProblemSpec spec;
  spec.name = "water2d";
  spec.state_dim = 2;
  spec.dynamics = [](double, std::span<const double> x, std::span<const double> a,
                     std::span<const double> b, std::span<double> out) {
    const double r = water::outflow_rate(x[0]);
    out[0] = b[0] - r * a[0];
    out[1] = 0.5 * r * a[0] - 0.5 * x[1];
  };
  spec.stage_cost = [](double, std::span<const double>, std::span<const double>, std::span<const double>) {
    return 0.0;
  };
  spec.terminal_cost = [](double, std::span<const double> x) { return x[0]; };
  spec.constraint = [](double, std::span<const double> x) {
    return std::max(std::abs(x[0] - 7.5) - 7.5, std::abs(x[1] - 3.0) - 2.0);
  };
  spec.controls_a = {{0.0}, {1.0}};
  spec.controls_b = {{0.0}, {10.0}};
  spec.horizon = 1.0;
  spec.time_invariant = true;
  // Controls enter affinely and separately, so max-min and min-max coincide:
  //   min_b (-p1 b) + max_a (p1 - p2/2) r(x1) a + p2 x2 / 2.
  spec.analytic_hamiltonian = [](double, std::span<const double> x, double, std::span<const double> p, double,
                                 PlayerMode mode) {
    const double r = water::outflow_rate(x[0]);
    const double rain = mode == PlayerMode::OptCtrl ? -5.0 * p[0] : std::min(0.0, -10.0 * p[0]);
    const double outflow = std::max(0.0, (p[0] - 0.5 * p[1]) * r);
    return rain + outflow + 0.5 * p[1] * x[1];
  };
  return spec;
}

/// dx/dt = a + b, L = g = x^2, |x| <= 2. Small enough for the brute-force
/// oracle.
inline ProblemSpec builtin_toy_1d() {
  ProblemSpec spec;
  spec.name = "toy1d";
  spec.state_dim = 1;
  spec.dynamics = [](double, std::span<const double>, std::span<const double> a, std::span<const double> b,
                     std::span<double> out) { out[0] = a[0] + b[0]; };
  spec.stage_cost = [](double, std::span<const double> x, std::span<const double>, std::span<const double>) {
    return x[0] * x[0];
  };
  spec.terminal_cost = [](double, std::span<const double> x) { return x[0] * x[0]; };
  spec.constraint = [](double, std::span<const double> x) { return std::abs(x[0]) - 2.0; };
  spec.controls_a = {{-1.0}, {1.0}};
  spec.controls_b = {{-0.5}, {0.5}};
  spec.horizon = 1.0;
  spec.time_invariant = true;
  return spec;
}

/// f = 0, L = 0, c = constraint_level, g = terminal_level. The value
/// function is stationary; used as a sanity instance.
inline ProblemSpec builtin_frozen(std::size_t state_dim = 1, double constraint_level = -1.0,
                                  double terminal_level = 0.0) {
  ProblemSpec spec;
  spec.name = "frozen";
  spec.state_dim = state_dim;
  spec.dynamics = [](double, std::span<const double>, std::span<const double>, std::span<const double>,
                     std::span<double> out) {
    for (double& v : out) v = 0.0;
  };
  spec.stage_cost = [](double, std::span<const double>, std::span<const double>, std::span<const double>) {
    return 0.0;
  };
  spec.terminal_cost = [terminal_level](double, std::span<const double>) { return terminal_level; };
  spec.constraint = [constraint_level](double, std::span<const double>) { return constraint_level; };
  spec.controls_a = {{-1.0}, {1.0}};
  spec.controls_b = {{-1.0}, {1.0}};
  spec.horizon = 1.0;
  spec.time_invariant = true;
  return spec;
}

/// Looks up a built-in by name: "water2d", "toy1d", "frozen1d", "frozen2d".
inline ProblemSpec builtin_problem(const std::string& name) {
  if (name == "water2d") return builtin_water_system();
  if (name == "toy1d") return builtin_toy_1d();
  if (name == "frozen1d") return builtin_frozen(1);
  if (name == "frozen2d") return builtin_frozen(2);
  throw ConfigError("unknown built-in problem '" + name + "'");
}

}  // namespace hjg

#endif  // HJG_PROBLEM_HPP
