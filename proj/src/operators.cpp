#include "sgf/operators.hpp"

#include <cmath>
#include <stdexcept>

#include "sgf/rng.hpp"

namespace sgf {

VectorField advect(const VectorField& f, const VectorField& g) {
  check_same_grid(f.grid(), g.grid());
  const Grid& G = *f.grid();
  VectorField out(f.grid(), BcTag::free);
  std::vector<double> tx(G.size()), ty(G.size());
  const ScalarField* comps[2] = {&g.x, &g.y};
  ScalarField* outs[2] = {&out.x, &out.y};
  for (int c = 0; c < 2; ++c) {
    diff_x(G, comps[c]->values.data(), comps[c]->tag, tx.data());
    diff_y(G, comps[c]->values.data(), comps[c]->tag, ty.data());
    double* o = outs[c]->values.data();
    for (int k = 0; k < G.size(); ++k) o[k] = f.x.values[k] * tx[k] + f.y.values[k] * ty[k];
  }
  return out;
}

double trilinear_b(const VectorField& f, const VectorField& g, const VectorField& h, bool skew) {
  check_same_grid(f.grid(), g.grid());
  check_same_grid(f.grid(), h.grid());
  const double a = l2_inner(advect(f, g), h);
  if (!skew) return a;
  return 0.5 * a - 0.5 * l2_inner(advect(f, h), g);
}

double b_hat_pairing(const VectorField& u, const VectorField& v, const VectorField& w, double alpha) {
  VectorField m = u;
  axpy(-alpha * alpha, laplacian(u), m);
  return trilinear_b(v, m, w) - trilinear_b(w, m, v);
}

double b_hat_pairing(const VectorField& u, const VectorField& w, double alpha) {
  return b_hat_pairing(u, u, w, alpha);
}

double b_hat_direct(const VectorField& u, const VectorField& v, const VectorField& w, double alpha) {
  const ScalarField q = curl_v(u, alpha);
  const Eigen::ArrayXd cross =
      q.values.array() * (-v.y.values.array() * w.x.values.array() + v.x.values.array() * w.y.values.array());
  return (cross * u.grid()->weights.array()).sum();
}

std::string to_string(NoiseKind k) { return k == NoiseKind::bumps ? "bumps" : "eigen"; }

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "bumps") return NoiseKind::bumps;
  if (s == "eigen") return NoiseKind::eigen;
  throw std::invalid_argument("unknown noise kind: " + s);
}

namespace {

ScalarField bump_stream(const GridPtr& g, double cx, double cy, double r) {
  return sample(
      g,
      [&](double x, double y) {
        const double s = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (r * r);
        return s < 1.0 ? std::pow(1.0 - s, 4) : 0.0;
      },
      BcTag::clamped);
}

}  // namespace

NoiseModel build_noise_model(NoiseKind kind, int K, double nu_tilde, const GridPtr& grid, std::uint64_t seed,
                             const StokesEigenbasis* stokes) {
  if (K < 0) throw std::invalid_argument("K must be nonnegative");
  if (nu_tilde < 0.0) throw std::invalid_argument("nu_tilde must be nonnegative");
  NoiseModel m;
  m.kind = kind;
  m.K = K;
  m.nu_tilde = nu_tilde;
  m.seed = seed;
  for (int k = 1; k <= K; ++k) {
    ScalarField psi;
    if (kind == NoiseKind::bumps) {
      const double r = 0.2 + 0.1 * uniform01(seed, 0, k, 0);
      const double cx = r + 0.02 + (1.0 - 2.0 * r - 0.04) * uniform01(seed, 0, k, 1);
      const double cy = r + 0.02 + (1.0 - 2.0 * r - 0.04) * uniform01(seed, 0, k, 2);
      psi = bump_stream(grid, cx, cy, r);
    } else {
      if (!stokes || stokes->size() < k) throw std::invalid_argument("eigen noise needs K Stokes modes");
      psi = stokes->stream[k - 1];
    }
    const double a = 1.0 / (double(k) * double(k));
    psi.values *= a / max_abs(perp_grad(psi));
    VectorField s = perp_grad(psi);
    m.sup_norm.push_back(max_abs(s));
    double w1 = m.sup_norm.back();
    for (const ScalarField* c : {&s.x, &s.y}) w1 = std::max({w1, max_abs(dx(*c)), max_abs(dy(*c))});
    m.w1_norm.push_back(w1);
    m.amplitude.push_back(a);
    m.stream.push_back(std::move(psi));
    m.sigma.push_back(std::move(s));
  }
  return m;
}

VectorField G_k(const VectorField& u, const NoiseModel& noise, int k) {
  if (k < 0 || k >= noise.K) throw std::out_of_range("noise index out of range");
  return leray_project(advect(noise.sigma[k], u));
}

VectorField ito_corrector_F(const VectorField& u, const NoiseModel& noise, double alpha) {
  VectorField f(u.grid(), BcTag::free);
  for (int k = 0; k < noise.K; ++k) {
    const VectorField r = resolvent_solve(G_k(u, noise, k), alpha);
    axpy(0.5, leray_project(advect(noise.sigma[k], r)), f);
  }
  return f;
}

double quintic_cutoff(double s) {
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

CorrectorField kato_corrector(const VectorField& u_bar, double delta, const GridPtr& grid) {
  check_same_grid(u_bar.grid(), grid);
  const double h = std::max(grid->hx, grid->hy);
  if (delta < 4.0 * h)
    throw std::invalid_argument("layer width below 4h is under-resolved");
  const ScalarField psi = matched_poisson(curl2d(u_bar));
  // The plateau at the wall covers the one-sided stencil (two nodes), so the discrete wall trace of
  // v equals that of u_bar; it is a fixed fraction of delta otherwise, keeping the profile
  // self-similar in delta. The profile ends one node short of delta so the differenced field is
  // supported in the strip. The product over the four walls stays smooth across the corner diagonals.
  CorrectorField c;
  c.delta = delta;
  c.cutoff = ScalarField(grid, BcTag::free);
  const double plateau = std::max(2.0 * h, 0.2 * delta);
  auto wall = [&](double d) { return quintic_cutoff((d - plateau) / (delta - h - plateau)); };
  for (int j = 0; j < grid->ny; ++j)
    for (int i = 0; i < grid->nx; ++i) {
      const double x = grid->x(i), y = grid->y(j);
      const double lx = grid->x(grid->nx - 1), ly = grid->y(grid->ny - 1);
      c.cutoff(i, j) = 1.0 - (1.0 - wall(x)) * (1.0 - wall(lx - x)) * (1.0 - wall(y)) * (1.0 - wall(ly - y));
    }
  ScalarField chi_psi(grid, c.cutoff.values.cwiseProduct(psi.values), BcTag::dirichlet);
  c.v = perp_grad(chi_psi);
  return c;
}

}  // namespace sgf
