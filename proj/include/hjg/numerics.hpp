#ifndef HJG_NUMERICS_HPP
#define HJG_NUMERICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "hjg/errors.hpp"
#include "hjg/grid.hpp"
#include "hjg/problem.hpp"

namespace hjg {

enum class DerivativeOrder { Upwind1, WENO5 };
enum class Integrator { Euler, TVDRK3 };

inline int required_ghost_width(DerivativeOrder order) { return order == DerivativeOrder::WENO5 ? 3 : 1; }

/// Discretisation choices for one solve.
struct SchemeOptions {
  DerivativeOrder derivative_order = DerivativeOrder::WENO5;
  Integrator integrator = Integrator::Euler;
  double cfl = 0.5;
  int lattice_a = 11;  // samples per control dimension, player A
  int lattice_b = 11;  // samples per control dimension, player B
  double safety = 1.1;  // inflation of the sampled dissipation bounds

  bool operator==(const SchemeOptions&) const = default;

  void validate() const {
    if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("scheme.cfl: must lie in (0, 1]");
    if (lattice_a < 2 || lattice_b < 2) throw ConfigError("scheme.lattice: at least 2 samples per dimension");
    if (!(safety >= 1.0) || !std::isfinite(safety)) throw ConfigError("scheme.safety: must be >= 1");
  }
};

/// One-sided approximations of a partial derivative at a node: `left` is
/// backward-biased (phi^-), `right` forward-biased (phi^+).
struct DerivativePair {
  double left = 0.0;
  double right = 0.0;
};

// ---------------------------------------------------------------------------
// Spatial derivatives

/// Smoothness-weight regularisation of the WENO5 stencil combination.
inline constexpr double kWenoEpsilon = 1e-6;

namespace detail {

// HJ-WENO5 combination of five consecutive one-sided differences.
inline double weno5(double v1, double v2, double v3, double v4, double v5) noexcept {
  const double p1 = v1 / 3.0 - 7.0 * v2 / 6.0 + 11.0 * v3 / 6.0;
  const double p2 = -v2 / 6.0 + 5.0 * v3 / 6.0 + v4 / 3.0;
  const double p3 = v3 / 3.0 + 5.0 * v4 / 6.0 - v5 / 6.0;

  const double s1 = 13.0 / 12.0 * (v1 - 2 * v2 + v3) * (v1 - 2 * v2 + v3) +
                    0.25 * (v1 - 4 * v2 + 3 * v3) * (v1 - 4 * v2 + 3 * v3);
  const double s2 = 13.0 / 12.0 * (v2 - 2 * v3 + v4) * (v2 - 2 * v3 + v4) + 0.25 * (v2 - v4) * (v2 - v4);
  const double s3 = 13.0 / 12.0 * (v3 - 2 * v4 + v5) * (v3 - 2 * v4 + v5) +
                    0.25 * (3 * v3 - 4 * v4 + v5) * (3 * v3 - 4 * v4 + v5);

  const double a1 = 0.1 / ((s1 + kWenoEpsilon) * (s1 + kWenoEpsilon));
  const double a2 = 0.6 / ((s2 + kWenoEpsilon) * (s2 + kWenoEpsilon));
  const double a3 = 0.3 / ((s3 + kWenoEpsilon) * (s3 + kWenoEpsilon));
  return (a1 * p1 + a2 * p2 + a3 * p3) / (a1 + a2 + a3);
}

}  // namespace detail

/// Writes one DerivativePair per interior node of a ghost-padded line.
/// `extended` holds `ghost` padding values on each side.
inline void derivatives_along_axis(std::span<const double> extended, int ghost, double spacing,
                                   DerivativeOrder order, std::span<DerivativePair> out) {
  if (ghost < required_ghost_width(order))
    throw ConfigError("derivatives_along_axis: ghost width too small for the derivative order");
  const std::size_t g = static_cast<std::size_t>(ghost);
  const std::size_t n = extended.size() - 2 * g;
  const double inv = 1.0 / spacing;
  const double* v = extended.data();

  if (order == DerivativeOrder::Upwind1) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = i + g;
      out[i] = {(v[k] - v[k - 1]) * inv, (v[k + 1] - v[k]) * inv};
    }
    return;
  }
  // D^- phi_k = (phi_k - phi_{k-1}) / h, so D^+ phi_k = D^- phi_{k+1}.
  auto dm = [&](std::size_t k) { return (v[k] - v[k - 1]) * inv; };
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = i + g;
    const double left = detail::weno5(dm(k - 2), dm(k - 1), dm(k), dm(k + 1), dm(k + 2));
    const double right = detail::weno5(dm(k + 3), dm(k + 2), dm(k + 1), dm(k), dm(k - 1));
    out[i] = {left, right};
  }
}

inline std::vector<DerivativePair> derivatives_along_axis(std::span<const double> extended, int ghost,
                                                          double spacing, DerivativeOrder order) {
  if (extended.size() < 2 * static_cast<std::size_t>(std::max(ghost, 0)) + 1)
    throw ConfigError("derivatives_along_axis: line shorter than its ghost padding");
  std::vector<DerivativePair> out(extended.size() - 2 * static_cast<std::size_t>(ghost));
  derivatives_along_axis(extended, ghost, spacing, order, out);
  return out;
}

// ---------------------------------------------------------------------------
// Control lattices

/// Uniform tensor sampling of a control box, first dimension slowest.
/// Box corners are always included.
struct ControlLattice {
  std::size_t dim = 0;
  std::vector<double> points;  // size() * dim values

  std::size_t size() const noexcept { return dim == 0 ? 0 : points.size() / dim; }
  std::span<const double> point(std::size_t i) const noexcept { return {points.data() + i * dim, dim}; }
};

inline ControlLattice make_lattice(const ControlBox& box, int per_dim) {
  if (per_dim < 1) throw ConfigError("control lattice: per-dimension count must be positive");
  const std::size_t m = box.dim();
  const std::size_t k = static_cast<std::size_t>(per_dim);
  std::size_t total = 1;
  for (std::size_t d = 0; d < m; ++d) total *= k;
  ControlLattice lat{m, std::vector<double>(total * m)};
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rem = i;
    for (std::size_t d = m; d-- > 0;) {
      const std::size_t j = rem % k;
      rem /= k;
      const double s = k == 1 ? 0.5 : static_cast<double>(j) / static_cast<double>(k - 1);
      lat.points[i * m + d] = j + 1 == k && k > 1 ? box.upper[d] : box.lower[d] + s * (box.upper[d] - box.lower[d]);
    }
  }
  return lat;
}

/// The lattices each player optimises over. In OptCtrl mode player B's
/// lattice is the single nominal control.
struct ControlLattices {
  ControlLattice a;
  ControlLattice b;
};

inline ControlLattices make_lattices(const ProblemSpec& spec, PlayerMode mode, int per_dim_a, int per_dim_b) {
  ControlLattices out{make_lattice(spec.controls_a, per_dim_a), {}};
  if (mode == PlayerMode::OptCtrl) {
    out.b = ControlLattice{spec.controls_b.dim(), nominal_b(spec)};
  } else {
    out.b = make_lattice(spec.controls_b, per_dim_b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hamiltonians

inline constexpr std::size_t kMaxStateDim = 16;

namespace detail {

inline double integrand(const ProblemSpec& spec, double t, std::span<const double> x, std::span<const double> a,
                        std::span<const double> b, std::span<const double> p, double q) {
  std::array<double, kMaxStateDim> fbuf;
  std::span<double> f(fbuf.data(), spec.state_dim);
  spec.dynamics(t, x, a, b, f);
  double h = q == 0.0 ? 0.0 : q * spec.stage_cost(t, x, a, b);
  for (std::size_t i = 0; i < f.size(); ++i) h -= p[i] * f[i];
  if (!std::isfinite(h)) throw EvaluationError("hamiltonian: non-finite integrand");
  return h;
}

}  // namespace detail

/// Hamiltonian by exhaustive enumeration of the control lattices:
///   Upper   max_a min_b [-p.f + q L]
///   Lower   min_b max_a [-p.f + q L]
///   OptCtrl max_a       [-p.f + q L]  (b nominal)
inline double hamiltonian_lattice(const ProblemSpec& spec, PlayerMode mode, double t, std::span<const double> x,
                                  std::span<const double> p, double q, const ControlLattices& lat) {
  if (spec.state_dim > kMaxStateDim) throw ConfigError("hamiltonian: state dimension too large");
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (mode == PlayerMode::Lower) {
    double best = inf;
    for (std::size_t j = 0; j < lat.b.size(); ++j) {
      double inner = -inf;
      for (std::size_t i = 0; i < lat.a.size(); ++i)
        inner = std::max(inner, detail::integrand(spec, t, x, lat.a.point(i), lat.b.point(j), p, q));
      best = std::min(best, inner);
    }
    return best;
  }
  double best = -inf;
  for (std::size_t i = 0; i < lat.a.size(); ++i) {
    double inner = inf;
    for (std::size_t j = 0; j < lat.b.size(); ++j)
      inner = std::min(inner, detail::integrand(spec, t, x, lat.a.point(i), lat.b.point(j), p, q));
    best = std::max(best, inner);
  }
  return best;
}

/// Hamiltonian H(t, x, z, p, q) for the given player mode; the problem's
/// closed form when present, lattice enumeration otherwise.
inline double hamiltonian(const ProblemSpec& spec, PlayerMode mode, double t, std::span<const double> x, double z,
                          std::span<const double> p, double q, const ControlLattices& lat) {
  if (p.size() != spec.state_dim) throw DomainError("hamiltonian: costate has wrong dimension");
  if (spec.analytic_hamiltonian) {
    const double h = spec.analytic_hamiltonian(t, x, z, p, q, mode);
    if (!std::isfinite(h)) throw EvaluationError("hamiltonian: non-finite analytic value");
    return h;
  }
  return hamiltonian_lattice(spec, mode, t, x, p, q, lat);
}

/// Per-axis bounds on |dH/dp_i| and |dH/dq| used as numerical viscosity.
struct Dissipation {
  std::vector<double> alpha_x;
  double alpha_z = 0.0;
};

/// Lax-Friedrichs numerical Hamiltonian. `d` holds one pair per state axis
/// followed by the z pair:
///   H(avg gradients) - sum_i alpha_i (phi_i^+ - phi_i^-)/2 - alpha_z (phi_z^+ - phi_z^-)/2
inline double lax_friedrichs(const ProblemSpec& spec, PlayerMode mode, double t, std::span<const double> x,
                             double z, std::span<const DerivativePair> d, const Dissipation& diss,
                             const ControlLattices& lat) {
  const std::size_t n = spec.state_dim;
  if (d.size() != n + 1) throw DomainError("lax_friedrichs: expected one derivative pair per axis");
  std::array<double, kMaxStateDim> pbuf;
  double visc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pbuf[i] = 0.5 * (d[i].right + d[i].left);
    visc += diss.alpha_x[i] * 0.5 * (d[i].right - d[i].left);
  }
  const double q = 0.5 * (d[n].right + d[n].left);
  visc += diss.alpha_z * 0.5 * (d[n].right - d[n].left);
  return hamiltonian(spec, mode, t, x, z, std::span<const double>(pbuf.data(), n), q, lat) - visc;
}

/// Samples |f_i| and |L| over the grid's state nodes and the control
/// lattices at time t, inflated by `safety`.
inline Dissipation dissipation_bounds(const ProblemSpec& spec, PlayerMode mode, const Grid& grid, double t,
                                      const ControlLattices& lat, double safety = 1.1) {
  const std::size_t n = spec.state_dim;
  if (grid.state_dim() != n) throw ConfigError("dissipation_bounds: grid and problem dimensions differ");
  if (n > kMaxStateDim) throw ConfigError("dissipation_bounds: state dimension too large");
  (void)mode;  // the lattices already encode the mode
  Dissipation diss{std::vector<double>(n, 0.0), 0.0};
  std::array<double, kMaxStateDim> xbuf, fbuf;
  std::span<double> x(xbuf.data(), n), f(fbuf.data(), n);
  const std::size_t count = grid.state_point_count();
  for (std::size_t s = 0; s < count; ++s) {
    std::size_t rem = s;
    for (std::size_t d = n; d-- > 0;) {
      x[d] = grid.state_axes[d].coord(rem % grid.state_axes[d].count);
      rem /= grid.state_axes[d].count;
    }
    for (std::size_t i = 0; i < lat.a.size(); ++i) {
      for (std::size_t j = 0; j < lat.b.size(); ++j) {
        spec.dynamics(t, x, lat.a.point(i), lat.b.point(j), f);
        for (std::size_t k = 0; k < n; ++k) diss.alpha_x[k] = std::max(diss.alpha_x[k], std::abs(f[k]));
        diss.alpha_z = std::max(diss.alpha_z, std::abs(spec.stage_cost(t, x, lat.a.point(i), lat.b.point(j))));
      }
    }
  }
  for (double& a : diss.alpha_x) a *= safety;
  diss.alpha_z *= safety;
  return diss;
}

/// dt = cfl / (sum_i alpha_i/dx_i + alpha_z/dz). With all-zero dissipation
/// the explicit `fallback` step is returned, or ConfigError raised.
inline double cfl_timestep(const Grid& grid, const Dissipation& diss, double cfl,
                           std::optional<double> fallback = std::nullopt) {
  double rate = diss.alpha_z / grid.z_axis.spacing();
  for (std::size_t i = 0; i < grid.state_dim(); ++i) rate += diss.alpha_x[i] / grid.state_axes[i].spacing();
  if (rate > 0.0) return cfl / rate;
  if (fallback && *fallback > 0.0) return *fallback;
  throw ConfigError("cfl_timestep: zero dissipation and no explicit time step");
}

}  // namespace hjg

#endif  // HJG_NUMERICS_HPP
