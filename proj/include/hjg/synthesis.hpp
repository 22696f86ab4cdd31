#ifndef HJG_SYNTHESIS_HPP
#define HJG_SYNTHESIS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "hjg/errors.hpp"
#include "hjg/extract.hpp"
#include "hjg/grid.hpp"
#include "hjg/numerics.hpp"
#include "hjg/problem.hpp"
#include "hjg/solver.hpp"

namespace hjg {

/// Value and first derivatives of V at one (t, x, z).
struct GradientSample {
  double v = 0.0;
  double v_t = 0.0;
  Vector d_x;
  double d_z = 0.0;
};

/// Central differences of the interpolated field with a step of one grid
/// spacing per axis; v_t from the adjacent stored stamp (forward when one
/// exists, backward at the last stamp).
inline GradientSample gradient_at(const ValueFunction& vf, double t, std::span<const double> x, double z) {
  const Grid& g = vf.grid;
  const std::size_t n = g.state_dim();
  if (x.size() != n) throw DomainError("gradient_at: state has wrong dimension");
  std::vector<double> p(x.begin(), x.end());
  p.push_back(z);
  for (std::size_t d = 0; d <= n; ++d) {
    const Axis& ax = g.axis(d);
    const double h = ax.spacing();
    const double slack = 1e-9 * h;
    if (p[d] < ax.min + h - slack || p[d] > ax.max - h + slack)
      throw DomainError("gradient_at: point within one spacing of the grid boundary");
  }
  const std::size_t k = vf.nearest_stamp(t);
  const ScalarField& field = vf.snapshots[k];

  GradientSample out;
  out.v = interpolate(field, p);
  out.d_x.resize(n);
  for (std::size_t d = 0; d <= n; ++d) {
    const double h = g.axis(d).spacing();
    const double keep = p[d];
    p[d] = keep + h;
    const double up = interpolate(field, p);
    p[d] = keep - h;
    const double down = interpolate(field, p);
    p[d] = keep;
    const double slope = (up - down) / (2.0 * h);
    if (d < n) out.d_x[d] = slope;
    else out.d_z = slope;
  }
  if (vf.times.size() >= 2) {
    const std::size_t k0 = k + 1 < vf.times.size() ? k : k - 1;
    const double v0 = interpolate(vf.snapshots[k0], p);
    const double v1 = interpolate(vf.snapshots[k0 + 1], p);
    out.v_t = (v1 - v0) / (vf.times[k0 + 1] - vf.times[k0]);
  }
  return out;
}

/// Which term of the HJ equation is active at the query point (see
/// classify_case for the rule per variant).
enum class ActiveCase { Case1, Case2, Case3 };

inline const char* to_string(ActiveCase c) {
  switch (c) {
    case ActiveCase::Case1: return "case1";
    case ActiveCase::Case2: return "case2";
    case ActiveCase::Case3: return "case3";
  }
  return "?";
}

/// Local picture used for control selection.
struct ControlAnalysis {
  GradientSample grad;
  double constraint = 0.0;       // c(t, x)
  double cost_gap = 0.0;         // g(t, x) - z
  double hamiltonian = 0.0;      // max-min (or min-max) of H~ over the lattices
  ActiveCase active = ActiveCase::Case2;
  double tolerance = 0.0;        // tau_case
};

struct ControlChoice {
  Vector a;
  Vector b;
  ActiveCase active = ActiveCase::Case2;
  ControlAnalysis analysis;
};

/// H~(a, b) = -D_x V . f + D_z V L.
inline double reduced_hamiltonian(const ProblemSpec& spec, double t, std::span<const double> x,
                                  const GradientSample& grad, std::span<const double> a,
                                  std::span<const double> b) {
  std::array<double, kMaxStateDim> fbuf;
  std::span<double> f(fbuf.data(), spec.state_dim);
  spec.dynamics(t, x, a, b, f);
  double h = grad.d_z * spec.stage_cost(t, x, a, b);
  for (std::size_t i = 0; i < f.size(); ++i) h -= grad.d_x[i] * f[i];
  return h;
}

/// Case of the control table from the three HJ terms c - V, g - z - V and
/// V_t - H (with H replaced by min{0,H} / max{0,H} in the time-invariant
/// forms, which have no g - z term):
///   P1: Case1 when max{c-V, g-z-V} >= V_t - H, else Case2.
///   P2: Case1 when c-V >= V_t - H; Case2 when g-z-V >= V_t - H;
///       Case3 otherwise.
inline ActiveCase classify_case(EquationVariant variant, double c_term, double g_term, double pde_term,
                                double tol) {
  const bool has_g = !is_time_invariant_form(variant);
  if (is_max_over_time(variant)) {
    const double clamp = has_g ? std::max(c_term, g_term) : c_term;
    return clamp >= pde_term - tol ? ActiveCase::Case1 : ActiveCase::Case2;
  }
  if (c_term >= pde_term - tol) return ActiveCase::Case1;
  if (has_g && g_term >= pde_term - tol) return ActiveCase::Case2;
  return ActiveCase::Case3;
}

namespace detail {

// Max-min (Upper/OptCtrl) or min-max (Lower) pair on the lattices, lowest
// lattice index winning ties.
inline std::pair<std::size_t, std::size_t> saddle_indices(const std::vector<double>& table, std::size_t na,
                                                          std::size_t nb, PlayerMode mode, double* value) {
  auto at = [&](std::size_t i, std::size_t j) { return table[i * nb + j]; };
  if (mode == PlayerMode::Lower) {
    std::size_t best_b = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nb; ++j) {
      double inner = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < na; ++i) inner = std::max(inner, at(i, j));
      if (inner < best) best = inner, best_b = j;
    }
    std::size_t best_a = 0;
    for (std::size_t i = 1; i < na; ++i)
      if (at(i, best_b) > at(best_a, best_b)) best_a = i;
    *value = best;
    return {best_a, best_b};
  }
  std::size_t best_a = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < na; ++i) {
    double inner = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nb; ++j) inner = std::min(inner, at(i, j));
    if (inner > best) best = inner, best_a = i;
  }
  std::size_t best_b = 0;
  for (std::size_t j = 1; j < nb; ++j)
    if (at(best_a, j) < at(best_a, best_b)) best_b = j;
  *value = best;
  return {best_a, best_b};
}

}  // namespace detail

/// Maxmini control pair from the gradient of V at (t, x, z):
/// Upper: a* in argmax_a min_b H~, b* in argmin_b H~(a*, .);
/// Lower: b* in argmin_b max_a H~, a* in argmax_a H~(., b*);
/// OptCtrl: a* in argmax_a H~(., b_nominal).
/// The active case of the control table is reported alongside.
inline ControlChoice optimal_controls(const ProblemSpec& spec, const ValueFunction& vf, PlayerMode mode,
                                      EquationVariant variant, double t, std::span<const double> x, double z,
                                      const ControlLattices& lat) {
  ControlChoice out;
  ControlAnalysis& an = out.analysis;
  an.grad = gradient_at(vf, t, x, z);
  const std::size_t na = lat.a.size(), nb = lat.b.size();
  std::vector<double> table(na * nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j)
      table[i * nb + j] = reduced_hamiltonian(spec, t, x, an.grad, lat.a.point(i), lat.b.point(j));
  const auto [ia, ib] = detail::saddle_indices(table, na, nb, mode, &an.hamiltonian);
  out.a.assign(lat.a.point(ia).begin(), lat.a.point(ia).end());
  out.b.assign(lat.b.point(ib).begin(), lat.b.point(ib).end());

  an.constraint = spec.constraint(t, x);
  an.cost_gap = spec.terminal_cost(t, x) - z;
  an.tolerance = 1e-6 * (1.0 + std::abs(an.grad.v));
  double h_eff = an.hamiltonian;
  if (variant == EquationVariant::P1TimeInvariant) h_eff = std::min(0.0, h_eff);
  if (variant == EquationVariant::P2TimeInvariant) h_eff = std::max(0.0, h_eff);
  an.active = classify_case(variant, an.constraint - an.grad.v, an.cost_gap - an.grad.v, an.grad.v_t - h_eff,
                            an.tolerance);
  out.active = an.active;
  return out;
}

/// Whether (a, b) belongs to the permissive optimal set of the analysed
/// case (upper-value reading; Case2 is the saddle set of the mode's play
/// order).
inline bool admissible_controls(const ProblemSpec& spec, PlayerMode mode, double t, std::span<const double> x,
                                const ControlAnalysis& an, const ControlLattices& lat, std::span<const double> a,
                                std::span<const double> b) {
  const double tol = an.tolerance;
  auto htilde = [&](std::span<const double> aa, std::span<const double> bb) {
    return reduced_hamiltonian(spec, t, x, an.grad, aa, bb);
  };
  auto min_over_b = [&](std::span<const double> aa) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < lat.b.size(); ++j) m = std::min(m, htilde(aa, lat.b.point(j)));
    return m;
  };
  auto max_over_a = [&](std::span<const double> bb) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lat.a.size(); ++i) m = std::max(m, htilde(lat.a.point(i), bb));
    return m;
  };
  switch (an.active) {
    case ActiveCase::Case1:
      return an.grad.v_t - min_over_b(a) <= tol;
    case ActiveCase::Case2:
      if (mode == PlayerMode::Lower)
        return max_over_a(b) <= an.hamiltonian + tol && htilde(a, b) >= max_over_a(b) - tol;
      return min_over_b(a) >= an.hamiltonian - tol && htilde(a, b) <= min_over_b(a) + tol;
    case ActiveCase::Case3:
      return an.grad.v_t - htilde(a, b) >= -tol;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Closed-loop rollout

/// Player B follows the value function's optimal reaction.
struct OptimalB {};
/// Player B replays a control per refresh interval (last one held).
struct FixedB {
  std::vector<Vector> sequence;
};
/// Player B holds one control.
struct ConstantB {
  Vector b;
};
using BPolicy = std::variant<OptimalB, FixedB, ConstantB>;

/// Sampled closed-loop path of the augmented system.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> z_values;
  std::vector<Vector> controls_a;  // control held on [times[k], times[k+1])
  std::vector<Vector> controls_b;
  std::vector<double> constraint_trace;  // c(s, x(s))
  std::vector<double> stage_cost_trace;  // L(s, x(s), a, b)
  std::vector<double> running_cost;      // int_0^s L + g(s, x(s))
  std::vector<ActiveCase> cases;

  double max_constraint() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double c : constraint_trace) m = std::max(m, c);
    return m;
  }
  /// Cost realised by the path: max over stopping times for the max-over-time
  /// class, min for the min-over-time class.
  double realized_cost(EquationVariant variant) const {
    if (running_cost.empty()) return std::numeric_limits<double>::quiet_NaN();
    return is_max_over_time(variant) ? *std::max_element(running_cost.begin(), running_cost.end())
                                     : *std::min_element(running_cost.begin(), running_cost.end());
  }
};

/// The state left the grid box; `partial` holds the path up to the exit.
class RolloutEscape : public Error {
 public:
  RolloutEscape(const std::string& what, Trajectory partial) : Error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

/// Starts at (x0, vartheta(0, x0)) and integrates (f, -L) with classical RK4
/// under zero-order-hold controls refreshed every `dt` until the horizon.
/// Gradients are taken at the point clamped one spacing inside the grid.
inline Trajectory rollout(const ProblemSpec& spec, const ValueFunction& vf, PlayerMode mode,
                          EquationVariant variant, std::span<const double> x0, const BPolicy& policy, double dt,
                          const ControlLattices& lat) {
  if (!(dt > 0.0)) throw DomainError("rollout: dt must be positive");
  const Grid& g = vf.grid;
  const std::size_t n = spec.state_dim;
  if (x0.size() != n || g.state_dim() != n) throw DomainError("rollout: state has wrong dimension");
  const ValueQueryResult start = extract_vartheta(vf, 0.0, x0, 0.0);
  if (start.saturated) throw FeasibilityError("rollout: infinite game value at the initial state");

  Trajectory tr;
  Vector x(x0.begin(), x0.end());
  double z = start.value;
  double integral = 0.0;
  double s = 0.0;
  const double horizon = spec.horizon;
  std::size_t step = 0;
  Vector xq(n);

  auto inside = [&](std::span<const double> xs) {
    for (std::size_t d = 0; d < n; ++d)
      if (!g.state_axes[d].contains(xs[d])) return false;
    return true;
  };
  auto clamp_inner = [&](const Axis& ax, double v) {
    const double h = ax.spacing();
    return std::clamp(v, ax.min + h, ax.max - h);
  };
  auto record = [&](const Vector& a, const Vector& b, ActiveCase tag) {
    tr.times.push_back(s);
    tr.states.push_back(x);
    tr.z_values.push_back(z);
    tr.controls_a.push_back(a);
    tr.controls_b.push_back(b);
    tr.constraint_trace.push_back(spec.constraint(s, x));
    tr.stage_cost_trace.push_back(spec.stage_cost(s, x, a, b));
    tr.running_cost.push_back(integral + spec.terminal_cost(s, x));
    tr.cases.push_back(tag);
  };

  // Augmented right-hand side (f, -L) at fixed controls.
  Vector fbuf(n);
  auto rhs = [&](double t, const Vector& xs, const Vector& a, const Vector& b, Vector& dx, double& dz) {
    spec.dynamics(t, xs, a, b, fbuf);
    dx = fbuf;
    dz = -spec.stage_cost(t, xs, a, b);
  };

  const double tiny = 1e-12 * horizon;
  Vector a, b;
  ActiveCase tag = ActiveCase::Case2;
  while (true) {
    for (std::size_t d = 0; d < n; ++d) xq[d] = clamp_inner(g.state_axes[d], x[d]);
    const double zq = clamp_inner(g.z_axis, z);
    const double tq = std::min(s, vf.times.back());
    const ControlChoice choice = optimal_controls(spec, vf, mode, variant, tq, xq, zq, lat);
    a = choice.a;
    tag = choice.active;
    if (std::holds_alternative<OptimalB>(policy)) {
      b = mode == PlayerMode::OptCtrl ? nominal_b(spec) : choice.b;
    } else if (const auto* fixed = std::get_if<FixedB>(&policy)) {
      if (fixed->sequence.empty()) throw DomainError("rollout: empty fixed control sequence for player B");
      b = fixed->sequence[std::min(step, fixed->sequence.size() - 1)];
    } else {
      b = std::get<ConstantB>(policy).b;
    }
    if (!spec.controls_b.contains(b)) throw DomainError("rollout: player B control outside its box");
    record(a, b, tag);
    if (horizon - s <= tiny) break;

    double h = std::min(dt, horizon - s);
    if (horizon - (s + h) < tiny) h = horizon - s;

    // Classical RK4 on (x, z); the running integral of L rides along as -dz.
    Vector k1x, k2x, k3x, k4x, tmp(n);
    double k1z, k2z, k3z, k4z;
    rhs(s, x, a, b, k1x, k1z);
    for (std::size_t d = 0; d < n; ++d) tmp[d] = x[d] + 0.5 * h * k1x[d];
    rhs(s + 0.5 * h, tmp, a, b, k2x, k2z);
    for (std::size_t d = 0; d < n; ++d) tmp[d] = x[d] + 0.5 * h * k2x[d];
    rhs(s + 0.5 * h, tmp, a, b, k3x, k3z);
    for (std::size_t d = 0; d < n; ++d) tmp[d] = x[d] + h * k3x[d];
    rhs(s + h, tmp, a, b, k4x, k4z);
    for (std::size_t d = 0; d < n; ++d) x[d] += h / 6.0 * (k1x[d] + 2 * k2x[d] + 2 * k3x[d] + k4x[d]);
    const double dz = h / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z);
    z += dz;
    integral -= dz;
    s = horizon - (s + h) < tiny ? horizon : s + h;
    ++step;

    for (double v : x)
      if (!std::isfinite(v)) throw EvaluationError("rollout: non-finite state");
    if (!inside(x)) {
      record(a, b, tag);
      throw RolloutEscape("rollout: state left the grid box at s=" + std::to_string(s), std::move(tr));
    }
  }
  return tr;
}

}  // namespace hjg

#endif  // HJG_SYNTHESIS_HPP
