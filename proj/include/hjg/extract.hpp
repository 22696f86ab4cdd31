#ifndef HJG_EXTRACT_HPP
#define HJG_EXTRACT_HPP

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hjg/errors.hpp"
#include "hjg/grid.hpp"
#include "hjg/solver.hpp"

namespace hjg {

/// Game value recovered from V: the smallest z with V(t, x, z) <= -margin.
struct ValueQueryResult {
  double value = std::numeric_limits<double>::infinity();
  bool saturated = true;  // no such z inside the z axis: value is +inf
  std::optional<std::pair<double, double>> z_bracket;
};

/// Scans V(t, x, .) upward along the z nodes (nearest stored stamp,
/// multilinear in x) and locates the first crossing of -margin, refined by
/// linear interpolation between the bracketing z nodes.
inline ValueQueryResult extract_vartheta(const ValueFunction& vf, double t, std::span<const double> x,
                                         double margin = 0.0) {
  const Grid& g = vf.grid;
  if (!(margin >= 0.0)) throw DomainError("extract_vartheta: margin must be non-negative");
  if (x.size() != g.state_dim()) throw DomainError("extract_vartheta: state has wrong dimension");
  for (std::size_t d = 0; d < x.size(); ++d)
    if (!g.state_axes[d].contains(x[d])) throw DomainError("extract_vartheta: state outside grid box");
  const ScalarField& field = vf.at(t);

  std::vector<double> point(x.begin(), x.end());
  point.push_back(0.0);
  const Axis& zax = g.z_axis;
  double prev_z = 0.0, prev_w = 0.0;
  for (std::size_t j = 0; j < zax.count; ++j) {
    point.back() = zax.coord(j);
    const double w = interpolate(field, point);
    if (w <= -margin) {
      ValueQueryResult r;
      r.saturated = false;
      if (j == 0) {
        r.value = zax.coord(0);
        r.z_bracket = std::make_pair(zax.coord(0), zax.coord(0));
      } else {
        const double frac = (prev_w + margin) / (prev_w - w);
        r.value = prev_z + frac * (point.back() - prev_z);
        r.z_bracket = std::make_pair(prev_z, point.back());
      }
      return r;
    }
    prev_z = point.back();
    prev_w = w;
  }
  return ValueQueryResult{};
}

/// V(t, ., z) over the state axes.
struct StateSlice {
  std::vector<Axis> axes;
  std::vector<double> values;  // row-major over the state axes
};

/// Slice of the nearest stored stamp at level z, linear in z between the
/// bracketing z nodes. Its sub-zero set is the region where the game value
/// is at most z.
inline StateSlice level_slice(const ValueFunction& vf, double t, double z) {
  const Grid& g = vf.grid;
  if (!g.z_axis.contains(z)) throw DomainError("level_slice: z outside the z axis");
  const ScalarField& field = vf.at(t);
  StateSlice out{g.state_axes, std::vector<double>(g.state_point_count())};
  std::vector<double> point(g.dims());
  const std::size_t nz = g.z_axis.count;
  for (std::size_t s = 0; s < out.values.size(); ++s) {
    g.node_coords(s * nz, point);
    point.back() = z;
    out.values[s] = interpolate(field, point);
  }
  return out;
}

}  // namespace hjg

#endif  // HJG_EXTRACT_HPP
