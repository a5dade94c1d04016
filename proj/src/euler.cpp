#include "sgf/euler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sgf/stokes.hpp"

namespace sgf {

VectorField euler_velocity(const ScalarField& omega) {
  return perp_grad(poisson_dirichlet(with_tag(omega, BcTag::free)));
}

ScalarField arakawa_jacobian(const ScalarField& psi, const ScalarField& w) {
  check_same_grid(psi.grid, w.grid);
  const Grid& g = *psi.grid;
  ScalarField J(psi.grid, BcTag::dirichlet);
  const double s = 1.0 / (12.0 * g.hx * g.hy);
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      auto p = [&](int a, int b) { return psi(i + a, j + b); };
      auto q = [&](int a, int b) { return w(i + a, j + b); };
      const double j1 = (p(1, 0) - p(-1, 0)) * (q(0, 1) - q(0, -1)) - (p(0, 1) - p(0, -1)) * (q(1, 0) - q(-1, 0));
      const double j2 = p(1, 0) * (q(1, 1) - q(1, -1)) - p(-1, 0) * (q(-1, 1) - q(-1, -1)) -
                        p(0, 1) * (q(1, 1) - q(-1, 1)) + p(0, -1) * (q(1, -1) - q(-1, -1));
      const double j3 = q(0, 1) * (p(1, 1) - p(-1, 1)) - q(0, -1) * (p(1, -1) - p(-1, -1)) -
                        q(1, 0) * (p(1, 1) - p(1, -1)) + q(-1, 0) * (p(-1, 1) - p(-1, -1));
      J(i, j) = s * (j1 + j2 + j3);
    }
  return J;
}

namespace {

ScalarField rhs(const ScalarField& w, double dt) {
  const ScalarField psi = poisson_dirichlet(with_tag(w, BcTag::free));
  const VectorField u = perp_grad(psi);
  const Grid& g = *w.grid;
  if (dt * max_abs(u) / std::min(g.hx, g.hy) > 0.5) throw std::runtime_error("Euler step violates CFL 0.5");
  ScalarField J = arakawa_jacobian(psi, w);
  J.values *= -1.0;
  return J;
}

}  // namespace

EulerTrajectory solve_euler(const ScalarField& omega0, double T, double dt, int save_stride) {
  if (!(dt > 0.0) || dt > T) throw std::invalid_argument("need 0 < dt <= T");
  if (save_stride < 1) throw std::invalid_argument("save_stride must be at least 1");
  const long steps = std::lround(T / dt);
  EulerTrajectory tr;
  ScalarField w = with_tag(omega0, BcTag::free);
  auto record = [&](double t) {
    const VectorField u = euler_velocity(w);
    tr.t.push_back(t);
    tr.max_divergence = std::max(tr.max_divergence, max_abs(divergence(u)));
    tr.energy.push_back(l2_norm(u));
    tr.enstrophy.push_back(l2_norm(w));
    tr.velocity.push_back(u);
    tr.omega.push_back(w);
  };
  record(0.0);
  for (long s = 0; s < steps; ++s) {
    const ScalarField k1 = rhs(w, dt);
    ScalarField tmp = w;
    tmp.values = w.values + 0.5 * dt * k1.values;
    const ScalarField k2 = rhs(tmp, dt);
    tmp.values = w.values + 0.5 * dt * k2.values;
    const ScalarField k3 = rhs(tmp, dt);
    tmp.values = w.values + dt * k3.values;
    const ScalarField k4 = rhs(tmp, dt);
    w.values += dt / 6.0 * (k1.values + 2.0 * k2.values + 2.0 * k3.values + k4.values);
    if ((s + 1) % save_stride == 0 || s + 1 == steps) record(double(s + 1) * dt);
  }
  return tr;
}

VectorField EulerTrajectory::velocity_at(double time) const {
  if (t.empty()) throw std::logic_error("empty Euler trajectory");
  if (time <= t.front()) return velocity.front();
  if (time >= t.back()) return velocity.back();
  const auto it = std::upper_bound(t.begin(), t.end(), time);
  const std::size_t hi = static_cast<std::size_t>(it - t.begin()), lo = hi - 1;
  const double th = (time - t[lo]) / (t[hi] - t[lo]);
  if (th <= 1e-12) return velocity[lo];
  if (th >= 1.0 - 1e-12) return velocity[hi];
  return (1.0 - th) * velocity[lo] + th * velocity[hi];
}

namespace {
double max_rel_drift(const std::vector<double>& s) {
  double d = 0.0;
  if (s.empty() || s.front() == 0.0) return 0.0;
  for (double v : s) d = std::max(d, std::abs(v - s.front()) / s.front());
  return d;
}
}  // namespace

double EulerTrajectory::energy_drift() const { return max_rel_drift(energy); }
double EulerTrajectory::enstrophy_drift() const { return max_rel_drift(enstrophy); }

ScalarField reference_stream(const GridPtr& g, const ReferenceFlow& flow) {
  const double pi = std::numbers::pi;
  const double lx = g->x(g->nx - 1), ly = g->y(g->ny - 1);
  const double r2 = flow.pair_radius * flow.pair_radius;
  const double cy = flow.pair_height * ly;
  const double c1 = 0.5 * lx - flow.pair_offset, c2 = 0.5 * lx + flow.pair_offset;
  return sample(
      g,
      [&](double x, double y) {
        const double g1 = std::exp(-((x - c1) * (x - c1) + (y - cy) * (y - cy)) / r2);
        const double g2 = std::exp(-((x - c2) * (x - c2) + (y - cy) * (y - cy)) / r2);
        const double b = std::sin(pi * x / lx) * std::sin(pi * y / ly);
        return flow.cell_amplitude * b + flow.pair_amplitude * b * b * b * (g1 - g2);
      },
      BcTag::dirichlet);
}

ScalarField reference_vorticity(const GridPtr& g, const ReferenceFlow& flow) {
  return laplacian(reference_stream(g, flow));
}

double septic_ramp(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * s * (35.0 - 84.0 * s + 70.0 * s * s - 20.0 * s * s * s);
}

VectorField make_initial_family(const ScalarField& stream, double alpha, double width_factor) {
  if (!(alpha > 0.0) || !(width_factor > 0.0)) throw std::invalid_argument("alpha and width must be positive");
  const GridPtr& g = stream.grid;
  const double d = width_factor * alpha;
  const double lx = g->x(g->nx - 1), ly = g->y(g->ny - 1);
  ScalarField psi = with_tag(stream, BcTag::clamped);
  for (int j = 0; j < g->ny; ++j)
    for (int i = 0; i < g->nx; ++i) {
      const double x = g->x(i), y = g->y(j);
      psi(i, j) *= septic_ramp(x / d) * septic_ramp((lx - x) / d) * septic_ramp(y / d) * septic_ramp((ly - y) / d);
    }
  return perp_grad(psi);
}

VectorField make_initial_family(const VectorField& u_bar0, double alpha, double width_factor) {
  return make_initial_family(matched_poisson(curl2d(u_bar0)), alpha, width_factor);
}

ResultTable verify_initial_scalings(const ScalarField& stream, const std::vector<double>& alphas,
                                    double width_factor) {
  ResultTable t;
  t.columns = {"alpha", "l2_gap2", "alpha2_grad2", "alpha6_h3s2"};
  const VectorField u_bar0 = perp_grad(with_tag(stream, BcTag::dirichlet));
  for (double a : alphas) {
    const VectorField u = make_initial_family(stream, a, width_factor);
    const double gap = l2_norm(u - u_bar0);
    const double h3 = norm_H3s(u);
    t.add_row({a, gap * gap, a * a * grad_inner(u, u), std::pow(a, 6) * h3 * h3});
  }
  bool l2 = true, gr = true;
  double lo = INFINITY, hi = 0.0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (i > 0) {
      l2 = l2 && t.rows[i][1] < t.rows[i - 1][1];
      gr = gr && t.rows[i][2] < t.rows[i - 1][2];
    }
    lo = std::min(lo, t.rows[i][3]);
    hi = std::max(hi, t.rows[i][3]);
  }
  t.flags["l2_decreasing"] = l2;
  t.flags["grad_decreasing"] = gr;
  t.flags["h3_bounded"] = t.rows.empty() || hi <= 10.0 * lo;
  return t;
}

}  // namespace sgf
