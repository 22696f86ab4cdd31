#ifndef HJG_TESTS_SUPPORT_HPP
#define HJG_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "hjg/grid.hpp"
#include "hjg/problem.hpp"
#include "hjg/solver.hpp"

namespace hjg::test {

class Random {
 public:
  explicit Random(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::vector<double> vector(std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(lo, hi);
    return v;
  }

 private:
  std::mt19937_64 rng_;
};

inline Grid toy_grid(std::size_t nx = 31, std::size_t nz = 31) {
  return build_grid({{-3.0, 3.0, nx}}, {0.0, 8.0, nz}, 3);
}

inline Grid water_grid(std::size_t n) { return build_grid({{0.0, 16.0, n}, {0.5, 5.5, n}}, {0.0, 18.0, n}, 3); }

inline SchemeOptions toy_scheme() {
  SchemeOptions s;
  s.lattice_a = 5;
  s.lattice_b = 5;
  return s;
}

inline constexpr EquationVariant kVariants[] = {EquationVariant::P1TimeVarying, EquationVariant::P1TimeInvariant,
                                                EquationVariant::P2TimeVarying, EquationVariant::P2TimeInvariant};
inline constexpr PlayerMode kModes[] = {PlayerMode::Upper, PlayerMode::Lower, PlayerMode::OptCtrl};

/// Interior z-column slope check helpers work on the raw (x..., z) layout.
inline double node_value(const ScalarField& f, std::size_t state_index, std::size_t j) {
  return f.values[state_index * f.grid.z_axis.count + j];
}

}  // namespace hjg::test

#endif  // HJG_TESTS_SUPPORT_HPP
