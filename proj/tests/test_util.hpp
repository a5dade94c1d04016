#pragma once

#include <cmath>
#include <vector>

#include "sgf/grid.hpp"
#include "sgf/rng.hpp"
#include "sgf/stokes.hpp"

namespace sgf::test {

inline constexpr double pi = 3.14159265358979323846;

// Random smooth free-tagged scalar built from a few cosines.
inline ScalarField smooth_scalar(const GridPtr& g, std::uint64_t id, BcTag tag = BcTag::free) {
  double c[3][3];
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) c[a][b] = std_normal(99, id, a, b);
  return sample(g, [&](double x, double y) {
    double s = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) s += c[a][b] * std::cos(a * 2.1 * x + 0.4) * std::cos(b * 1.7 * y + 0.9);
    return s;
  }, tag);
}

inline VectorField smooth_vector(const GridPtr& g, std::uint64_t id) {
  return VectorField(smooth_scalar(g, 2 * id), smooth_scalar(g, 2 * id + 1));
}

// Clamped bump psi = (x(1-x)y(1-y))^2 times a smooth factor.
inline ScalarField clamped_bump(const GridPtr& g, double shift = 0.0) {
  return sample(g, [&](double x, double y) {
    const double b = x * (1 - x) * y * (1 - y);
    return b * b * (1.0 + 0.5 * std::sin(2.0 * x + shift) * std::cos(3.0 * y));
  }, BcTag::clamped);
}

inline VectorField random_noslip(const StokesEigenbasis& st, int modes, std::uint64_t id) {
  Eigen::VectorXd c(modes);
  for (int i = 0; i < modes; ++i) c[i] = std_normal(5, id, 0, i) / (1.0 + i);
  return span_field(st.modes, c);
}

inline double max_diff(const ScalarField& a, const ScalarField& b) { return (a.values - b.values).cwiseAbs().maxCoeff(); }

inline double max_diff(const VectorField& a, const VectorField& b) {
  return std::max(max_diff(a.x, b.x), max_diff(a.y, b.y));
}

// Max error on nodes at least `margin` cells from the walls.
inline double interior_max(const ScalarField& f, int margin) {
  const Grid& g = *f.grid;
  double m = 0.0;
  for (int j = margin; j < g.ny - margin; ++j)
    for (int i = margin; i < g.nx - margin; ++i) m = std::max(m, std::abs(f(i, j)));
  return m;
}

}  // namespace sgf::test
