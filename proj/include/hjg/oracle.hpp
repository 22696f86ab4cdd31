#ifndef HJG_ORACLE_HPP
#define HJG_ORACLE_HPP

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "hjg/errors.hpp"
#include "hjg/grid.hpp"
#include "hjg/numerics.hpp"
#include "hjg/parallel.hpp"
#include "hjg/problem.hpp"
#include "hjg/solver.hpp"

namespace hjg {

/// Brute-force discrete dynamic-programming reference values.
struct OracleTable {
  Grid grid;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // one field per stamp
  ControlLattices lattices;
};

/// Refuses problems needing more than this many backups per stamp.
inline constexpr double kOracleEvaluationLimit = 1e8;

/// Backward recursion over `stamps` uniform time stamps. At each node the
/// augmented state is advanced by one explicit Euler step of (f, -L) for
/// every lattice control pair; the successor value is read by multilinear
/// interpolation (linear extrapolation outside the box) and optimised in the
/// mode's play order:
///   Upper   min_a max_b   (A commits, B reacts)
///   Lower   max_b min_a
///   OptCtrl min_a         (b nominal)
/// The variant's clamps are then applied to the optimised backup, with the
/// time-invariant forms also allowing the freezing choice (stay put).
inline OracleTable oracle_solve(const ProblemSpec& spec, const Grid& grid, EquationVariant variant,
                                PlayerMode mode, int lattice_a, int lattice_b, std::size_t stamps) {
  validate(spec);
  if (grid.state_dim() != spec.state_dim) throw ConfigError("oracle_solve: grid and problem dimensions differ");
  if (spec.state_dim > kMaxStateDim) throw ConfigError("oracle_solve: state dimension too large");
  if (stamps < 2) throw ConfigError("oracle_solve: at least 2 stamps required");
  if (is_time_invariant_form(variant) && !spec.time_invariant)
    throw ConfigError("oracle_solve: time-invariant equation requires a time-invariant problem");

  OracleTable table;
  table.grid = grid;
  table.lattices = make_lattices(spec, mode, lattice_a, lattice_b);
  const auto& la = table.lattices.a;
  const auto& lb = table.lattices.b;
  const double work = static_cast<double>(grid.point_count()) * static_cast<double>(la.size()) *
                      static_cast<double>(lb.size());
  if (work > kOracleEvaluationLimit) throw ConfigError("oracle_solve: problem too large for brute force");

  table.times = SnapshotPolicy{stamps, {}}.resolve(spec.horizon);
  table.values.resize(stamps);
  table.values[stamps - 1] = terminal_condition(spec, grid).values;

  const std::size_t n = spec.state_dim;
  const std::size_t dims = grid.dims();
  const std::size_t total = grid.point_count();
  constexpr double inf = std::numeric_limits<double>::infinity();

  for (std::size_t k = stamps - 1; k-- > 0;) {
    const double t = table.times[k];
    const double h = table.times[k + 1] - t;
    const std::vector<double>& next = table.values[k + 1];
    std::vector<double>& cur = table.values[k];
    cur.resize(total);

    parallel_for(
        total,
        [&](std::size_t begin, std::size_t end) {
          std::array<double, kMaxStateDim + 1> node, prop, fbuf;
          std::span<double> f(fbuf.data(), n);
          for (std::size_t i = begin; i < end; ++i) {
            grid.node_coords(i, std::span<double>(node.data(), dims));
            std::span<const double> x(node.data(), n);
            const double z = node[n];

            auto backup = [&](std::span<const double> a, std::span<const double> b) {
              spec.dynamics(t, x, a, b, f);
              const double l = spec.stage_cost(t, x, a, b);
              for (std::size_t d = 0; d < n; ++d) prop[d] = x[d] + h * f[d];
              prop[n] = z - h * l;
              return interpolate_values(grid, next, std::span<const double>(prop.data(), dims), true);
            };

            double w;
            if (mode == PlayerMode::Lower) {
              w = -inf;
              for (std::size_t j = 0; j < lb.size(); ++j) {
                double inner = inf;
                for (std::size_t a = 0; a < la.size(); ++a) inner = std::min(inner, backup(la.point(a), lb.point(j)));
                w = std::max(w, inner);
              }
            } else {
              w = inf;
              for (std::size_t a = 0; a < la.size(); ++a) {
                double inner = -inf;
                for (std::size_t j = 0; j < lb.size(); ++j) inner = std::max(inner, backup(la.point(a), lb.point(j)));
                w = std::min(w, inner);
              }
            }

            const double c = spec.constraint(t, x);
            const double gz = spec.terminal_cost(t, x) - z;
            switch (variant) {
              case EquationVariant::P1TimeVarying: cur[i] = std::max({c, gz, w}); break;
              case EquationVariant::P1TimeInvariant: cur[i] = std::max({c, next[i], w}); break;
              case EquationVariant::P2TimeVarying: cur[i] = std::max(c, std::min(gz, w)); break;
              case EquationVariant::P2TimeInvariant: cur[i] = std::max(c, std::min(next[i], w)); break;
            }
          }
        },
        64);
  }
  return table;
}

}  // namespace hjg

#endif  // HJG_ORACLE_HPP
