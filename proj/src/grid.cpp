#include "sgf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sgf {

GridPtr make_grid(int nx, int ny) {
  if (nx < 9 || ny < 9)
    throw std::invalid_argument("grid too small: need at least 9 nodes per axis, got " +
                                std::to_string(nx) + "x" + std::to_string(ny));
  auto g = std::make_shared<Grid>();
  g->nx = nx;
  g->ny = ny;
  g->hx = 1.0 / (nx - 1);
  g->hy = 1.0 / (ny - 1);
  g->interior_mask.resize(g->size());
  g->boundary_distance.resize(g->size());
  g->weights.resize(g->size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int k = g->idx(i, j);
      const bool b = g->on_boundary(i, j);
      g->interior_mask[k] = b ? 0 : 1;
      const double x = g->x(i), y = g->y(j);
      g->boundary_distance[k] =
          b ? 0.0 : std::min({x, 1.0 - x, y, 1.0 - y});
      const double wx = (i == 0 || i == nx - 1) ? 0.5 * g->hx : g->hx;
      const double wy = (j == 0 || j == ny - 1) ? 0.5 * g->hy : g->hy;
      g->weights[k] = wx * wy;
    }
  }
  return g;
}

ScalarField::ScalarField(GridPtr g, BcTag t)
    : grid(std::move(g)), values(Eigen::VectorXd::Zero(grid->size())), tag(t) {}

ScalarField::ScalarField(GridPtr g, Eigen::VectorXd v, BcTag t)
    : grid(std::move(g)), values(std::move(v)), tag(t) {
  if (values.size() != grid->size()) throw std::invalid_argument("field does not conform to grid");
}

VectorField::VectorField(GridPtr g, BcTag t) : x(g, t), y(g, t) {}

VectorField::VectorField(ScalarField ux, ScalarField uy) : x(std::move(ux)), y(std::move(uy)) {
  check_same_grid(x.grid, y.grid);
}

void check_same_grid(const GridPtr& a, const GridPtr& b) {
  if (!a || !b || !a->same_shape(*b)) throw std::invalid_argument("grid mismatch");
}

ScalarField with_tag(ScalarField f, BcTag tag) {
  f.tag = tag;
  if (tag != BcTag::free) {
    const Grid& g = *f.grid;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (g.on_boundary(i, j)) f(i, j) = 0.0;
  }
  return f;
}

VectorField noslip(VectorField u) {
  return VectorField(with_tag(std::move(u.x), BcTag::dirichlet),
                     with_tag(std::move(u.y), BcTag::dirichlet));
}

void diff_x(const Grid& g, const double* f, BcTag tag, double* out) {
  const int nx = g.nx, ny = g.ny;
  const double c = 0.5 / g.hx;
  for (int j = 0; j < ny; ++j) {
    const double* r = f + nx * j;
    double* o = out + nx * j;
    for (int i = 1; i < nx - 1; ++i) o[i] = c * (r[i + 1] - r[i - 1]);
    if (tag == BcTag::clamped) {
      o[0] = 0.0;
      o[nx - 1] = 0.0;
    } else {
      o[0] = c * (-3.0 * r[0] + 4.0 * r[1] - r[2]);
      o[nx - 1] = c * (3.0 * r[nx - 1] - 4.0 * r[nx - 2] + r[nx - 3]);
    }
  }
}

void diff_y(const Grid& g, const double* f, BcTag tag, double* out) {
  const int nx = g.nx, ny = g.ny;
  const double c = 0.5 / g.hy;
  for (int j = 1; j < ny - 1; ++j)
    for (int i = 0; i < nx; ++i) out[i + nx * j] = c * (f[i + nx * (j + 1)] - f[i + nx * (j - 1)]);
  const int t = nx * (ny - 1);
  for (int i = 0; i < nx; ++i) {
    if (tag == BcTag::clamped) {
      out[i] = 0.0;
      out[t + i] = 0.0;
    } else {
      out[i] = c * (-3.0 * f[i] + 4.0 * f[i + nx] - f[i + 2 * nx]);
      out[t + i] = c * (3.0 * f[t + i] - 4.0 * f[t + i - nx] + f[t + i - 2 * nx]);
    }
  }
}

ScalarField dx(const ScalarField& f) {
  ScalarField o(f.grid, BcTag::free);
  diff_x(*f.grid, f.values.data(), f.tag, o.values.data());
  return o;
}

ScalarField dy(const ScalarField& f) {
  ScalarField o(f.grid, BcTag::free);
  diff_y(*f.grid, f.values.data(), f.tag, o.values.data());
  return o;
}

VectorField grad(const ScalarField& phi) {
  VectorField u(dx(phi), dy(phi));
  if (phi.tag == BcTag::clamped) return noslip(std::move(u));
  return u;
}

ScalarField divergence(const VectorField& u) {
  check_same_grid(u.x.grid, u.y.grid);
  // On a no-slip field the wall-normal derivative of the normal component is
  // read through the same ghost reflection that encodes the clamped stream function.
  const BcTag t = u.noslip() ? BcTag::clamped : BcTag::free;
  ScalarField a(u.grid(), BcTag::free), b(u.grid(), BcTag::free);
  diff_x(*u.grid(), u.x.values.data(), t, a.values.data());
  diff_y(*u.grid(), u.y.values.data(), t, b.values.data());
  a.values += b.values;
  return a;
}

ScalarField curl2d(const VectorField& u) {
  check_same_grid(u.x.grid, u.y.grid);
  ScalarField a(u.grid(), BcTag::free), b(u.grid(), BcTag::free);
  diff_x(*u.grid(), u.y.values.data(), BcTag::free, a.values.data());
  diff_y(*u.grid(), u.x.values.data(), BcTag::free, b.values.data());
  a.values -= b.values;
  return a;
}

VectorField perp_grad(const ScalarField& phi) {
  ScalarField ux = dy(phi);
  ux.values = -ux.values;
  VectorField u(std::move(ux), dx(phi));
  if (phi.tag == BcTag::clamped) return noslip(std::move(u));
  return u;
}

namespace {

// Second difference along one axis for a strided line of n samples.
inline double second_diff(const double* f, int i, int n, int stride, double inv_h2, BcTag tag) {
  if (i > 0 && i < n - 1) return inv_h2 * (f[(i - 1) * stride] - 2.0 * f[i * stride] + f[(i + 1) * stride]);
  const int s = (i == 0) ? stride : -stride;
  const double* p = f + i * stride;
  if (tag == BcTag::clamped) return inv_h2 * (2.0 * p[s] - 2.0 * p[0]);
  return inv_h2 * (2.0 * p[0] - 5.0 * p[s] + 4.0 * p[2 * s] - p[3 * s]);
}

}  // namespace

ScalarField laplacian(const ScalarField& phi) {
  const Grid& g = *phi.grid;
  ScalarField o(phi.grid, BcTag::free);
  const double ix = 1.0 / (g.hx * g.hx), iy = 1.0 / (g.hy * g.hy);
  const double* f = phi.values.data();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      o(i, j) = second_diff(f + g.nx * j, i, g.nx, 1, ix, phi.tag) +
                second_diff(f + i, j, g.ny, g.nx, iy, phi.tag);
  return o;
}

VectorField laplacian(const VectorField& u) {
  return VectorField(laplacian(u.x), laplacian(u.y));
}

ScalarField biharmonic(const ScalarField& phi) {
  if (phi.tag != BcTag::clamped)
    throw std::invalid_argument("biharmonic requires a clamped field");
  const Grid& g = *phi.grid;
  const ScalarField lap = laplacian(phi);
  ScalarField o(phi.grid, BcTag::free);
  const double ix = 1.0 / (g.hx * g.hx), iy = 1.0 / (g.hy * g.hy);
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i)
      o(i, j) = ix * (lap(i - 1, j) - 2.0 * lap(i, j) + lap(i + 1, j)) +
                iy * (lap(i, j - 1) - 2.0 * lap(i, j) + lap(i, j + 1));
  return o;
}

ScalarField matched_laplacian(const ScalarField& phi) {
  ScalarField a = dx(dx(phi));
  a.values += dy(dy(phi)).values;
  return a;
}

double l2_inner(const ScalarField& f, const ScalarField& g) {
  check_same_grid(f.grid, g.grid);
  return (f.values.array() * g.values.array() * f.grid->weights.array()).sum();
}

double l2_inner(const VectorField& f, const VectorField& g) {
  return l2_inner(f.x, g.x) + l2_inner(f.y, g.y);
}

double l2_norm(const ScalarField& f) { return std::sqrt(std::max(0.0, l2_inner(f, f))); }
double l2_norm(const VectorField& f) { return std::sqrt(std::max(0.0, l2_inner(f, f))); }

double grad_inner(const VectorField& f, const VectorField& g) {
  return l2_inner(grad(f.x), grad(g.x)) + l2_inner(grad(f.y), grad(g.y));
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  VectorField c = a;
  c.x.values += b.x.values;
  c.y.values += b.y.values;
  if (!b.noslip()) c.x.tag = c.y.tag = BcTag::free;
  return c;
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  VectorField c = a;
  c.x.values -= b.x.values;
  c.y.values -= b.y.values;
  if (!b.noslip()) c.x.tag = c.y.tag = BcTag::free;
  return c;
}

VectorField operator*(double s, const VectorField& a) {
  VectorField c = a;
  c.x.values *= s;
  c.y.values *= s;
  return c;
}

void axpy(double a, const VectorField& x, VectorField& y) {
  y.x.values += a * x.x.values;
  y.y.values += a * x.y.values;
}

double max_abs(const ScalarField& f) { return f.values.cwiseAbs().maxCoeff(); }
double max_abs(const VectorField& f) {
  return (f.x.values.array().square() + f.y.values.array().square()).sqrt().maxCoeff();
}

}  // namespace sgf
