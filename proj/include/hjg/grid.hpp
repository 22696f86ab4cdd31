#ifndef HJG_GRID_HPP
#define HJG_GRID_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hjg/errors.hpp"

namespace hjg {

/// Uniformly spaced coordinate axis with `count` nodes from `min` to `max`.
struct Axis {
  double min = 0.0;
  double max = 1.0;
  std::size_t count = 2;

  double spacing() const noexcept { return (max - min) / static_cast<double>(count - 1); }
  double coord(std::size_t i) const noexcept {
    return i + 1 == count ? max : min + static_cast<double>(i) * spacing();
  }
  bool contains(double v) const noexcept {
    const double slack = 1e-12 * (1.0 + std::abs(min) + std::abs(max));
    return v >= min - slack && v <= max + slack;
  }

  void validate(const std::string& label) const {
    if (count < 2) throw ConfigError(label + ": count must be at least 2");
    if (!std::isfinite(min) || !std::isfinite(max)) throw ConfigError(label + ": bounds must be finite");
    if (!(max > min)) throw ConfigError(label + ": max must exceed min");
  }

  bool operator==(const Axis&) const = default;
};

/// Cartesian grid over the augmented state (x_1, ..., x_n, z). Values are
/// stored row-major with z varying fastest.
struct Grid {
  std::vector<Axis> state_axes;
  Axis z_axis;
  int ghost_width = 3;

  std::size_t state_dim() const noexcept { return state_axes.size(); }
  std::size_t dims() const noexcept { return state_axes.size() + 1; }
  const Axis& axis(std::size_t d) const { return d < state_axes.size() ? state_axes[d] : z_axis; }

  std::size_t state_point_count() const noexcept {
    std::size_t n = 1;
    for (const auto& a : state_axes) n *= a.count;
    return n;
  }
  std::size_t point_count() const noexcept { return state_point_count() * z_axis.count; }

  /// Flat-index distance between neighbours along axis d.
  std::size_t stride(std::size_t d) const noexcept {
    std::size_t s = 1;
    for (std::size_t k = dims(); k-- > d + 1;) s *= axis(k).count;
    return s;
  }

  /// Coordinates (x, z) of a node; `out` has length dims().
  void node_coords(std::size_t flat, std::span<double> out) const noexcept {
    for (std::size_t d = dims(); d-- > 0;) {
      const auto& ax = axis(d);
      out[d] = ax.coord(flat % ax.count);
      flat /= ax.count;
    }
  }

  bool contains(std::span<const double> point) const noexcept {
    if (point.size() != dims()) return false;
    for (std::size_t d = 0; d < dims(); ++d)
      if (!axis(d).contains(point[d])) return false;
    return true;
  }

  bool operator==(const Grid&) const = default;
};

inline Grid build_grid(std::vector<Axis> state_axes, Axis z_axis, int ghost_width) {
  if (state_axes.empty()) throw ConfigError("grid: at least one state axis is required");
  for (std::size_t i = 0; i < state_axes.size(); ++i)
    state_axes[i].validate("grid.state_axes[" + std::to_string(i) + "]");
  z_axis.validate("grid.z_axis");
  if (ghost_width < 0) throw ConfigError("grid.ghost_width: must be non-negative");
  return Grid{std::move(state_axes), z_axis, ghost_width};
}

/// Node values of V(t_k, x, z) on a grid.
struct ScalarField {
  Grid grid;
  std::vector<double> values;
};

namespace detail {

struct CellWeight {
  std::size_t lower;  // lower node index of the cell
  double frac;        // position inside the cell, 0 at lower node
};

// Locates `v` in the axis. Outside the axis the boundary cell is used and
// `frac` leaves [0, 1], which gives linear extrapolation.
inline CellWeight locate(const Axis& ax, double v) noexcept {
  const double s = (v - ax.min) / ax.spacing();
  const double last = static_cast<double>(ax.count - 1);
  double cell = std::floor(s);
  if (cell < 0.0) cell = 0.0;
  if (cell > last - 1.0) cell = last - 1.0;
  double frac = s - cell;
  // Snap onto nodes so node queries reproduce stored values bit-exactly.
  if (std::abs(frac) < 1e-12) frac = 0.0;
  if (std::abs(frac - 1.0) < 1e-12) frac = 1.0;
  return {static_cast<std::size_t>(cell), frac};
}

}  // namespace detail

/// Multilinear interpolation of node values at `point`. With
/// `extrapolate` set, points outside the box are extended linearly from the
/// boundary cell; otherwise they raise DomainError.
inline double interpolate_values(const Grid& grid, std::span<const double> values,
                                 std::span<const double> point, bool extrapolate = false) {
  const std::size_t dims = grid.dims();
  if (point.size() != dims) throw DomainError("interpolate: point has wrong dimension");
  if (!extrapolate && !grid.contains(point)) throw DomainError("interpolate: point outside grid box");

  constexpr std::size_t kMaxDims = 8;
  if (dims > kMaxDims) throw ConfigError("interpolate: too many dimensions");
  detail::CellWeight cw[kMaxDims];
  std::size_t strides[kMaxDims];
  std::size_t base = 0;
  for (std::size_t d = 0; d < dims; ++d) {
    cw[d] = detail::locate(grid.axis(d), point[d]);
    strides[d] = grid.stride(d);
    base += cw[d].lower * strides[d];
  }

  double acc = 0.0;
  const std::size_t corners = std::size_t{1} << dims;
  for (std::size_t mask = 0; mask < corners; ++mask) {
    double w = 1.0;
    std::size_t offset = base;
    for (std::size_t d = 0; d < dims; ++d) {
      if (mask & (std::size_t{1} << d)) {
        w *= cw[d].frac;
        offset += strides[d];
      } else {
        w *= 1.0 - cw[d].frac;
      }
    }
    if (w != 0.0) acc += w * values[offset];
  }
  return acc;
}

inline double interpolate(const ScalarField& field, std::span<const double> point) {
  return interpolate_values(field.grid, field.values, point, false);
}

/// Pads a 1-D line with `width` ghosts per side by linear extrapolation from
/// the two outermost interior values. `out` has size line.size() + 2*width.
inline void extend_line(std::span<const double> line, int width, std::span<double> out) noexcept {
  const std::size_t n = line.size();
  const std::size_t w = static_cast<std::size_t>(width);
  for (std::size_t i = 0; i < n; ++i) out[i + w] = line[i];
  const double lo_slope = line[1] - line[0];
  const double hi_slope = line[n - 1] - line[n - 2];
  for (std::size_t k = 1; k <= w; ++k) {
    out[w - k] = line[0] - static_cast<double>(k) * lo_slope;
    out[w + n - 1 + k] = line[n - 1] + static_cast<double>(k) * hi_slope;
  }
}

/// Field values padded by `width` ghost layers on every axis.
struct ExtendedArray {
  std::vector<std::size_t> shape;  // per-axis count including ghosts
  std::vector<double> values;      // row-major, last axis fastest
};

/// Pads every axis with `width` ghost layers by linear extrapolation, one
/// axis at a time (corner ghosts are extrapolated from edge ghosts).
inline ExtendedArray ghost_extend(const ScalarField& field, int width) {
  const Grid& g = field.grid;
  if (width < 0 || width > g.ghost_width)
    throw ConfigError("ghost_extend: width exceeds the grid's ghost width");
  const std::size_t dims = g.dims();
  const std::size_t w = static_cast<std::size_t>(width);

  std::vector<std::size_t> shape(dims);
  for (std::size_t d = 0; d < dims; ++d) shape[d] = g.axis(d).count;
  std::vector<double> cur = field.values;

  for (std::size_t d = 0; d < dims; ++d) {
    std::vector<std::size_t> next_shape = shape;
    next_shape[d] += 2 * w;
    std::size_t outer = 1, inner = 1;
    for (std::size_t k = 0; k < d; ++k) outer *= shape[k];
    for (std::size_t k = d + 1; k < dims; ++k) inner *= shape[k];
    const std::size_t n = shape[d], m = next_shape[d];
    std::vector<double> next(outer * m * inner);
    std::vector<double> line(n), ext(m);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < inner; ++i) {
        for (std::size_t k = 0; k < n; ++k) line[k] = cur[(o * n + k) * inner + i];
        extend_line(line, width, ext);
        for (std::size_t k = 0; k < m; ++k) next[(o * m + k) * inner + i] = ext[k];
      }
    }
    cur = std::move(next);
    shape = std::move(next_shape);
  }
  return {std::move(shape), std::move(cur)};
}

}  // namespace hjg

#endif  // HJG_GRID_HPP
