#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

namespace sgf {

// Boundary tag carried by every scalar field.
//   dirichlet: vanishes on boundary nodes
//   clamped:   vanishes on boundary nodes, zero normal derivative (ghost reflection)
//   free:      no constraint, one-sided stencils at the boundary
enum class BcTag : std::uint8_t { dirichlet = 0, clamped = 1, free = 2 };

struct Grid {
  int nx = 0, ny = 0;
  double hx = 0.0, hy = 0.0;
  std::vector<std::uint8_t> interior_mask;
  std::vector<double> boundary_distance;
  Eigen::VectorXd weights;  // trapezoid quadrature weights

  int size() const { return nx * ny; }
  int idx(int i, int j) const { return i + nx * j; }
  double x(int i) const { return i * hx; }
  double y(int j) const { return j * hy; }
  double h() const { return hx; }
  bool on_boundary(int i, int j) const { return i == 0 || j == 0 || i == nx - 1 || j == ny - 1; }
  int boundary_count() const { return 2 * nx + 2 * ny - 4; }
  bool same_shape(const Grid& o) const { return nx == o.nx && ny == o.ny; }
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int nx, int ny);

struct ScalarField {
  GridPtr grid;
  Eigen::VectorXd values;
  BcTag tag = BcTag::free;

  ScalarField() = default;
  ScalarField(GridPtr g, BcTag t = BcTag::free);
  ScalarField(GridPtr g, Eigen::VectorXd v, BcTag t);

  double& operator()(int i, int j) { return values[grid->idx(i, j)]; }
  double operator()(int i, int j) const { return values[grid->idx(i, j)]; }
};

// No-slip vector fields carry dirichlet-tagged components.
struct VectorField {
  ScalarField x, y;

  VectorField() = default;
  VectorField(GridPtr g, BcTag t = BcTag::free);
  VectorField(ScalarField ux, ScalarField uy);

  const GridPtr& grid() const { return x.grid; }
  bool noslip() const { return x.tag == BcTag::dirichlet && y.tag == BcTag::dirichlet; }
};

template <class F>
ScalarField sample(const GridPtr& g, F&& f, BcTag tag = BcTag::free) {
  ScalarField s(g, tag);
  for (int j = 0; j < g->ny; ++j)
    for (int i = 0; i < g->nx; ++i) s(i, j) = f(g->x(i), g->y(j));
  if (tag != BcTag::free)
    for (int j = 0; j < g->ny; ++j)
      for (int i = 0; i < g->nx; ++i)
        if (g->on_boundary(i, j)) s(i, j) = 0.0;
  return s;
}

// Zero the boundary nodes and retag.
ScalarField with_tag(ScalarField f, BcTag tag);
VectorField noslip(VectorField u);

// Shared first-difference operator. Central inside; at walls either the
// second-order one-sided stencil or, for clamped fields, the ghost reflection.
void diff_x(const Grid& g, const double* f, BcTag tag, double* out);
void diff_y(const Grid& g, const double* f, BcTag tag, double* out);

ScalarField dx(const ScalarField& f);
ScalarField dy(const ScalarField& f);

VectorField grad(const ScalarField& phi);
ScalarField divergence(const VectorField& u);
ScalarField curl2d(const VectorField& u);
VectorField perp_grad(const ScalarField& phi);
ScalarField laplacian(const ScalarField& phi);
VectorField laplacian(const VectorField& u);
ScalarField biharmonic(const ScalarField& phi);

// Second differences of the shared first-difference operator: dx(dx) + dy(dy).
// curl2d(perp_grad(phi)) equals this exactly for free-tagged phi.
ScalarField matched_laplacian(const ScalarField& phi);

double l2_inner(const ScalarField& f, const ScalarField& g);
double l2_inner(const VectorField& f, const VectorField& g);
double l2_norm(const ScalarField& f);
double l2_norm(const VectorField& f);
// Sum over components of <grad f_c, grad g_c>.
double grad_inner(const VectorField& f, const VectorField& g);

void check_same_grid(const GridPtr& a, const GridPtr& b);

// Pointwise helpers.
VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(double s, const VectorField& a);
void axpy(double a, const VectorField& x, VectorField& y);
double max_abs(const ScalarField& f);
double max_abs(const VectorField& f);

}  // namespace sgf
