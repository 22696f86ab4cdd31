#ifndef HJG_SOLVER_HPP
#define HJG_SOLVER_HPP

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hjg/errors.hpp"
#include "hjg/grid.hpp"
#include "hjg/numerics.hpp"
#include "hjg/parallel.hpp"
#include "hjg/problem.hpp"

namespace hjg {

/// Which HJ equation is solved.
///  P1*: cost is the max over stopping times (Problem 1).
///  P2*: cost is the min over stopping times (Problem 2).
///  *TimeInvariant: the freezing-control form, valid for time-invariant
///  problems only.
enum class EquationVariant { P1TimeVarying, P1TimeInvariant, P2TimeVarying, P2TimeInvariant };

inline const char* to_string(EquationVariant v) {
  switch (v) {
    case EquationVariant::P1TimeVarying: return "P1TimeVarying";
    case EquationVariant::P1TimeInvariant: return "P1TimeInvariant";
    case EquationVariant::P2TimeVarying: return "P2TimeVarying";
    case EquationVariant::P2TimeInvariant: return "P2TimeInvariant";
  }
  return "?";
}

inline bool is_max_over_time(EquationVariant v) {
  return v == EquationVariant::P1TimeVarying || v == EquationVariant::P1TimeInvariant;
}
inline bool is_time_invariant_form(EquationVariant v) {
  return v == EquationVariant::P1TimeInvariant || v == EquationVariant::P2TimeInvariant;
}

/// Backward update of one node: PDE step followed by the variant's clamps.
inline double step_update(EquationVariant variant, double c_now, double gz_now, double v_next, double dt,
                          double h_hat) {
  switch (variant) {
    case EquationVariant::P1TimeVarying:
      return std::max({c_now, gz_now, v_next - dt * h_hat});
    case EquationVariant::P1TimeInvariant:
      return std::max(c_now, v_next - dt * std::min(0.0, h_hat));
    case EquationVariant::P2TimeVarying:
      return std::max(c_now, std::min(gz_now, v_next - dt * h_hat));
    case EquationVariant::P2TimeInvariant:
      return std::max(c_now, v_next - dt * std::max(0.0, h_hat));
  }
  return v_next;
}

/// max{c(T, x), g(T, x) - z} at every node.
inline ScalarField terminal_condition(const ProblemSpec& spec, const Grid& grid) {
  if (grid.state_dim() != spec.state_dim) throw ConfigError("terminal_condition: grid and problem dimensions differ");
  ScalarField field{grid, std::vector<double>(grid.point_count())};
  const std::size_t n = spec.state_dim;
  const std::size_t nz = grid.z_axis.count;
  std::vector<double> coords(grid.dims());
  for (std::size_t s = 0; s < grid.state_point_count(); ++s) {
    grid.node_coords(s * nz, coords);
    std::span<const double> x(coords.data(), n);
    const double c = spec.constraint(spec.horizon, x);
    const double g = spec.terminal_cost(spec.horizon, x);
    for (std::size_t j = 0; j < nz; ++j) field.values[s * nz + j] = std::max(c, g - grid.z_axis.coord(j));
  }
  return field;
}

/// Time stamps at which the value function is kept.
struct SnapshotPolicy {
  std::size_t stamps = 201;   // uniform over [0, T] when `times` is empty
  std::vector<double> times;  // explicit ascending stamps from 0 to T

  std::vector<double> resolve(double horizon) const {
    if (!times.empty()) {
      if (times.size() < 2 || times.front() != 0.0 || std::abs(times.back() - horizon) > 1e-12 * horizon)
        throw ConfigError("snapshot times must run from 0 to the horizon");
      for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw ConfigError("snapshot times must be strictly ascending");
      std::vector<double> out = times;
      out.back() = horizon;
      return out;
    }
    if (stamps < 2) throw ConfigError("snapshot stamps: at least 2 required");
    std::vector<double> out(stamps);
    for (std::size_t k = 0; k < stamps; ++k)
      out[k] = horizon * static_cast<double>(k) / static_cast<double>(stamps - 1);
    out.back() = horizon;
    return out;
  }
};

/// V(t_k, x, z) at the stored stamps.
struct ValueFunction {
  Grid grid;
  std::vector<double> times;
  std::vector<ScalarField> snapshots;
  EquationVariant variant = EquationVariant::P1TimeVarying;
  PlayerMode mode = PlayerMode::Upper;

  /// Index of the stored stamp nearest to t (ties go to the earlier stamp).
  std::size_t nearest_stamp(double t) const {
    if (times.empty()) throw DomainError("value function has no stamps");
    const double slack = 1e-9 * (1.0 + std::abs(times.back()));
    if (t < times.front() - slack || t > times.back() + slack)
      throw DomainError("time outside the stored stamps");
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end()) return times.size() - 1;
    const std::size_t hi = static_cast<std::size_t>(it - times.begin());
    if (hi == 0) return 0;
    return (t - times[hi - 1] <= times[hi] - t) ? hi - 1 : hi;
  }

  const ScalarField& at(double t) const { return snapshots[nearest_stamp(t)]; }
};

struct SolveStats {
  std::size_t steps = 0;  // Euler steps or RK3 steps taken
  double dt = 0.0;        // CFL step
  double wall_seconds = 0.0;
  Dissipation dissipation;
};

/// Values beyond this magnitude abort the solve.
inline constexpr double kBlowupThreshold = 1e12;

namespace detail {

// One backward sweep. Holds the per-solve geometry and scratch buffers.
class Sweeper {
 public:
  Sweeper(const ProblemSpec& spec, const Grid& grid, EquationVariant variant, PlayerMode mode,
          const SchemeOptions& opt)
      : spec_(spec),
        grid_(grid),
        variant_(variant),
        mode_(mode),
        opt_(opt),
        lattices_(make_lattices(spec, mode, opt.lattice_a, opt.lattice_b)),
        n_(spec.state_dim),
        nz_(grid.z_axis.count),
        ns_(grid.state_point_count()),
        total_(grid.point_count()),
        pairs_(grid.dims(), std::vector<DerivativePair>(grid.point_count())),
        c_(ns_),
        g_(ns_),
        state_coords_(ns_ * n_) {
    std::vector<double> coords(grid.dims());
    for (std::size_t s = 0; s < ns_; ++s) {
      grid.node_coords(s * nz_, coords);
      for (std::size_t i = 0; i < n_; ++i) state_coords_[s * n_ + i] = coords[i];
    }
    diss_ = dissipation_bounds(spec, mode, grid, spec.horizon, lattices_, opt.safety);
    if (spec.time_invariant) refresh_clamps(spec.horizon, true);
  }

  const Dissipation& dissipation() const { return diss_; }

  // Applies the full update operator (PDE step + clamps) from t_from to
  // t_from - dt.
  void step(const std::vector<double>& in, double t_from, double dt, std::vector<double>& out) {
    const double t_to = t_from - dt;
    if (opt_.integrator == Integrator::Euler) {
      euler(in, t_from, t_to, dt, out);
      return;
    }
    stage1_.resize(total_);
    stage2_.resize(total_);
    euler(in, t_from, t_to, dt, stage1_);
    euler(stage1_, t_from, t_to, dt, stage2_);
    for (std::size_t i = 0; i < total_; ++i) stage2_[i] = 0.75 * in[i] + 0.25 * stage2_[i];
    euler(stage2_, t_from, t_to, dt, out);
    for (std::size_t i = 0; i < total_; ++i) out[i] = in[i] / 3.0 + 2.0 * out[i] / 3.0;
  }

 private:
  void refresh_clamps(double t, bool force = false) {
    if (spec_.time_invariant && !force) return;
    for (std::size_t s = 0; s < ns_; ++s) {
      std::span<const double> x(state_coords_.data() + s * n_, n_);
      c_[s] = spec_.constraint(t, x);
      g_[s] = spec_.terminal_cost(t, x);
    }
  }

  void compute_pairs(const std::vector<double>& v) {
    const int ghost = required_ghost_width(opt_.derivative_order);
    const std::size_t dims = grid_.dims();
    for (std::size_t d = 0; d < dims; ++d) {
      const std::size_t len = grid_.axis(d).count;
      const std::size_t stride = grid_.stride(d);
      const std::size_t lines = total_ / len;
      const double h = grid_.axis(d).spacing();
      auto& out = pairs_[d];
      parallel_for(
          lines,
          [&](std::size_t begin, std::size_t end) {
            std::vector<double> line(len), ext(len + 2 * static_cast<std::size_t>(ghost));
            std::vector<DerivativePair> res(len);
            for (std::size_t l = begin; l < end; ++l) {
              // Line l: (outer, inner) with inner < stride.
              const std::size_t base = (l / stride) * stride * len + (l % stride);
              for (std::size_t k = 0; k < len; ++k) line[k] = v[base + k * stride];
              extend_line(line, ghost, ext);
              derivatives_along_axis(ext, ghost, h, opt_.derivative_order, res);
              for (std::size_t k = 0; k < len; ++k) out[base + k * stride] = res[k];
            }
          },
          16);
    }
  }

  void euler(const std::vector<double>& in, double t_from, double t_to, double dt, std::vector<double>& out) {
    compute_pairs(in);
    refresh_clamps(t_to);
    const std::size_t dims = grid_.dims();
    parallel_for(total_, [&](std::size_t begin, std::size_t end) {
      std::array<DerivativePair, kMaxStateDim + 1> d;
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t s = i / nz_;
        const double z = grid_.z_axis.coord(i % nz_);
        for (std::size_t k = 0; k < dims; ++k) d[k] = pairs_[k][i];
        std::span<const double> x(state_coords_.data() + s * n_, n_);
        const double h = lax_friedrichs(spec_, mode_, t_from, x, z, std::span<const DerivativePair>(d.data(), dims),
                                        diss_, lattices_);
        out[i] = step_update(variant_, c_[s], g_[s] - z, in[i], dt, h);
      }
    });
  }

  const ProblemSpec& spec_;
  const Grid& grid_;
  EquationVariant variant_;
  PlayerMode mode_;
  SchemeOptions opt_;
  ControlLattices lattices_;
  Dissipation diss_;
  std::size_t n_, nz_, ns_, total_;
  std::vector<std::vector<DerivativePair>> pairs_;
  std::vector<double> c_, g_;
  std::vector<double> state_coords_;
  std::vector<double> stage1_, stage2_;
};

inline void check_finite(const std::vector<double>& v, double t) {
  for (double x : v) {
    if (!std::isfinite(x) || std::abs(x) > kBlowupThreshold)
      throw NumericalBlowup("value function blew up at t=" + std::to_string(t), t);
  }
}

}  // namespace detail

/// Backward sweep from the terminal condition to t = 0 with CFL
/// sub-stepping. Every sub-step applies derivatives, the Lax-Friedrichs
/// Hamiltonian and the variant's clamps; snapshots are kept at the policy's
/// stamps only.
inline ValueFunction solve(const ProblemSpec& spec, const Grid& grid, EquationVariant variant, PlayerMode mode,
                           const SchemeOptions& options = {}, const SnapshotPolicy& policy = {},
                           SolveStats* stats = nullptr) {
  const auto wall_start = std::chrono::steady_clock::now();
  validate(spec);
  options.validate();
  if (grid.state_dim() != spec.state_dim) throw ConfigError("solve: grid and problem dimensions differ");
  if (spec.state_dim > kMaxStateDim) throw ConfigError("solve: state dimension too large");
  if (grid.ghost_width < required_ghost_width(options.derivative_order))
    throw ConfigError("solve: grid ghost width too small for the derivative order");
  if (is_time_invariant_form(variant) && !spec.time_invariant)
    throw ConfigError("solve: time-invariant equation requires a time-invariant problem");

  ValueFunction vf;
  vf.grid = grid;
  vf.variant = variant;
  vf.mode = mode;
  vf.times = policy.resolve(spec.horizon);
  const std::size_t stamps = vf.times.size();
  vf.snapshots.resize(stamps);

  detail::Sweeper sweeper(spec, grid, variant, mode, options);
  const double min_interval = [&] {
    double m = vf.times[1] - vf.times[0];
    for (std::size_t k = 2; k < stamps; ++k) m = std::min(m, vf.times[k] - vf.times[k - 1]);
    return m;
  }();
  const double dt_cfl = cfl_timestep(grid, sweeper.dissipation(), options.cfl, min_interval);

  ScalarField terminal = terminal_condition(spec, grid);
  std::vector<double> cur = terminal.values;
  std::vector<double> next(cur.size());
  vf.snapshots[stamps - 1] = std::move(terminal);
  std::size_t steps = 0;

  for (std::size_t k = stamps - 1; k-- > 0;) {
    const double t_stop = vf.times[k];
    double t = vf.times[k + 1];
    const double tiny = 1e-12 * spec.horizon;
    while (t - t_stop > tiny) {
      double dt = std::min(dt_cfl, t - t_stop);
      if (t - dt - t_stop < tiny) dt = t - t_stop;
      sweeper.step(cur, t, dt, next);
      cur.swap(next);
      t = (t - dt - t_stop < tiny) ? t_stop : t - dt;
      ++steps;
    }
    detail::check_finite(cur, t_stop);
    vf.snapshots[k] = ScalarField{grid, cur};
  }

  if (stats) {
    stats->steps = steps;
    stats->dt = dt_cfl;
    stats->dissipation = sweeper.dissipation();
    stats->wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  }
  return vf;
}

}  // namespace hjg

#endif  // HJG_SOLVER_HPP
