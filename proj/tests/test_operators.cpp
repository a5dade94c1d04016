#include <doctest.h>

#include <cmath>
#include <vector>

#include "sgf/euler.hpp"
#include "sgf/operators.hpp"
#include "test_util.hpp"

using namespace sgf;
using namespace sgf::test;

namespace {

VectorField bump_velocity(const GridPtr& g, double shift) { return perp_grad(clamped_bump(g, shift)); }

double gnorm(const VectorField& u) { return std::sqrt(grad_inner(u, u)); }

}  // namespace

TEST_CASE("trilinear form: skew symmetry is exact") {
  const GridPtr g = make_grid(33, 33);
  for (std::uint64_t id = 0; id < 5; ++id) {
    const VectorField f = smooth_vector(g, id), a = smooth_vector(g, 10 + id), b = smooth_vector(g, 20 + id);
    const double s = std::abs(trilinear_b(f, a, b)) + 1.0;
    CHECK(std::abs(trilinear_b(f, a, b) + trilinear_b(f, b, a)) <= 1e-13 * s);
    CHECK(std::abs(trilinear_b(f, a, a)) <= 1e-13 * s);
  }
}

TEST_CASE("trilinear form: plain and skew forms agree at second order for no-slip divergence-free f") {
  auto diff = [](int n) {
    const GridPtr g = make_grid(n, n);
    const VectorField f = bump_velocity(g, 0.0), a = bump_velocity(g, 1.0), b = bump_velocity(g, 2.0);
    return std::abs(trilinear_b(f, a, b, false) - trilinear_b(f, a, b, true)) /
           (l2_norm(f) * gnorm(a) * l2_norm(b));
  };
  const double d1 = diff(33), d2 = diff(65);
  CHECK(d1 < 1e-2);
  CHECK(d1 / d2 >= 3.0);
}

TEST_CASE("b_hat pairing") {
  const GridPtr g = make_grid(33, 33);
  const VectorField u = bump_velocity(g, 0.3), v = bump_velocity(g, 1.1), w = bump_velocity(g, 2.2);
  const double alpha = 0.1;
  const double s = std::abs(b_hat_pairing(u, v, w, alpha)) + 1e-12;
  CHECK(std::abs(b_hat_pairing(u, v, v, alpha)) <= 1e-13 * s);
  CHECK(std::abs(b_hat_pairing(u, u, alpha)) <= 1e-13 * (std::abs(b_hat_pairing(u, w, alpha)) + 1.0));
  CHECK(std::abs(b_hat_pairing(u, v, w, alpha) + b_hat_pairing(u, w, v, alpha)) <= 1e-13 * s);
  CHECK(b_hat_pairing(u, v, w, alpha) == b_hat_pairing(u, v, w, alpha));

  auto rel = [&](int n) {
    const GridPtr gg = make_grid(n, n);
    const VectorField a = bump_velocity(gg, 0.3), b = bump_velocity(gg, 1.1), c = bump_velocity(gg, 2.2);
    const double direct = b_hat_direct(a, b, c, alpha);
    return std::abs(b_hat_pairing(a, b, c, alpha) - direct) / std::abs(direct);
  };
  const double r1 = rel(33), r2 = rel(65);
  CHECK(r1 < 0.1);
  CHECK(r1 / r2 >= 3.0);
}

TEST_CASE("noise model invariants") {
  const GridPtr g = make_grid(33, 33);
  const NoiseModel m = build_noise_model(NoiseKind::bumps, 6, 0.01, g, 3);
  REQUIRE(m.K == 6);
  REQUIRE(m.sigma.size() == 6);
  for (int k = 0; k < m.K; ++k) {
    const double a = 1.0 / ((k + 1.0) * (k + 1.0));
    CHECK(m.amplitude[k] == doctest::Approx(a).epsilon(1e-15));
    double brute = 0.0;
    for (int i = 0; i < g->size(); ++i)
      brute = std::max(brute, std::sqrt(m.sigma[k].x.values[i] * m.sigma[k].x.values[i] + m.sigma[k].y.values[i] * m.sigma[k].y.values[i]));
    CHECK(m.sup_norm[k] == doctest::Approx(brute).epsilon(1e-15));
    CHECK(m.sup_norm[k] == doctest::Approx(a).epsilon(1e-12));
    CHECK(m.w1_norm[k] >= m.sup_norm[k]);
    CHECK(m.sigma[k].noslip());
    CHECK(max_abs(divergence(m.sigma[k])) <= 1e-10 * m.w1_norm[k]);
  }
  // Same seed, same model; another seed moves the bumps.
  const NoiseModel m2 = build_noise_model(NoiseKind::bumps, 6, 0.01, g, 3);
  const NoiseModel m3 = build_noise_model(NoiseKind::bumps, 6, 0.01, g, 4);
  CHECK(max_diff(m.sigma[2], m2.sigma[2]) == 0.0);
  CHECK(max_diff(m.sigma[2], m3.sigma[2]) > 0.0);
  CHECK(build_noise_model(NoiseKind::bumps, 0, 0.01, g).sigma.empty());
  CHECK_THROWS(build_noise_model(NoiseKind::bumps, -1, 0.01, g));
  CHECK_THROWS(build_noise_model(NoiseKind::bumps, 2, -0.1, g));
  CHECK_THROWS(build_noise_model(NoiseKind::eigen, 2, 0.1, g));
  CHECK(noise_kind_from_string(to_string(NoiseKind::eigen)) == NoiseKind::eigen);
  CHECK_THROWS(noise_kind_from_string("white"));

  const StokesEigenbasis st = stokes_eigensolve(g, 4);
  const NoiseModel e = build_noise_model(NoiseKind::eigen, 4, 0.01, g, 0, &st);
  for (int k = 0; k < 4; ++k) CHECK(e.sup_norm[k] == doctest::Approx(1.0 / ((k + 1.0) * (k + 1.0))).epsilon(1e-12));
}

TEST_CASE("G_k examples and bound") {
  const GridPtr g = make_grid(33, 33);
  const NoiseModel m = build_noise_model(NoiseKind::bumps, 4, 0.01, g, 1);
  CHECK(max_abs(G_k(VectorField(g, BcTag::dirichlet), m, 0)) == 0.0);
  CHECK_THROWS(G_k(VectorField(g, BcTag::dirichlet), m, 4));
  const double h = g->hx;
  for (int s = 0; s < 10; ++s) {
    const VectorField u = bump_velocity(g, 0.37 * s);
    for (int k = 0; k < m.K; ++k) {
      const VectorField G = G_k(u, m, k);
      CHECK(l2_norm(G) <= m.sup_norm[k] * gnorm(u) * (1.0 + 10.0 * h));
      CHECK(l2_norm(resolvent_solve(G, 0.1)) <= m.sup_norm[k] * gnorm(u) * (1.0 + 10.0 * h));
    }
  }
}

TEST_CASE("G_k is energy-orthogonal up to the projection error") {
  auto worst = [](int n) {
    const GridPtr g = make_grid(n, n);
    const NoiseModel m = build_noise_model(NoiseKind::bumps, 3, 0.01, g, 1);
    double w = 0.0;
    for (int s = 0; s < 3; ++s) {
      const VectorField u = bump_velocity(g, 0.5 * s);
      for (int k = 0; k < m.K; ++k) {
        const VectorField G = G_k(u, m, k);
        // The unprojected advection is exactly orthogonal through the skew form.
        CHECK(std::abs(trilinear_b(m.sigma[k], u, u)) <= 1e-13 * l2_norm(G) * l2_norm(u));
        w = std::max(w, std::abs(l2_inner(G, u)) / (l2_norm(G) * l2_norm(u)));
      }
    }
    return w;
  };
  const double w1 = worst(33), w2 = worst(65);
  CHECK(w1 < 1e-2);
  CHECK(w1 / w2 >= 2.0);
}

TEST_CASE("Ito corrector F") {
  const GridPtr g = make_grid(33, 33);
  const VectorField u = bump_velocity(g, 0.2);
  const double alpha = 0.1;
  const NoiseModel none = build_noise_model(NoiseKind::bumps, 0, 0.01, g, 1);
  CHECK(max_abs(ito_corrector_F(u, none, alpha)) == 0.0);

  const NoiseModel one = build_noise_model(NoiseKind::bumps, 1, 0.01, g, 1);
  VectorField expect = leray_project(advect(one.sigma[0], resolvent_solve(G_k(u, one, 0), alpha)));
  expect.x.values *= 0.5;
  expect.y.values *= 0.5;
  CHECK(max_diff(ito_corrector_F(u, one, alpha), expect) == 0.0);

  const NoiseModel m = build_noise_model(NoiseKind::bumps, 4, 0.01, g, 1);
  double bound = 0.0;
  for (int k = 0; k < m.K; ++k) bound += 0.5 * m.sup_norm[k] * m.w1_norm[k];
  CHECK(l2_norm(ito_corrector_F(u, m, alpha)) <= 2.0 * bound * gnorm(u));
  CHECK(max_abs(ito_corrector_F(VectorField(g, BcTag::dirichlet), m, alpha)) == 0.0);
}

TEST_CASE("quintic cutoff") {
  CHECK(quintic_cutoff(-0.5) == 1.0);
  CHECK(quintic_cutoff(0.0) == 1.0);
  CHECK(quintic_cutoff(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(quintic_cutoff(1.0) == 0.0);
  CHECK(quintic_cutoff(2.0) == 0.0);
  double prev = 1.0;
  for (int i = 1; i <= 100; ++i) {
    const double v = quintic_cutoff(i / 100.0);
    CHECK(v <= prev);
    prev = v;
  }
  // Flat to second order at both ends.
  const double e = 1e-3;
  CHECK(1.0 - quintic_cutoff(e) <= 11.0 * e * e * e);
  CHECK(quintic_cutoff(1.0 - e) <= 11.0 * e * e * e);
}

TEST_CASE("Kato corrector: trace, support and layer scaling") {
  const GridPtr g = make_grid(129, 129);
  const VectorField ub = perp_grad(reference_stream(g));
  CHECK_THROWS(kato_corrector(ub, 3.0 * g->hx, g));

  for (double delta : {0.05, 0.2}) {
    const CorrectorField kc = kato_corrector(ub, delta, g);
    double trace = 0.0, outside = 0.0;
    for (int j = 0; j < g->ny; ++j)
      for (int i = 0; i < g->nx; ++i) {
        const double x = g->x(i), y = g->y(j);
        const bool wall = i == 0 || j == 0 || i == g->nx - 1 || j == g->ny - 1;
        if (wall) trace = std::max({trace, std::abs(kc.v.x(i, j) - ub.x(i, j)), std::abs(kc.v.y(i, j) - ub.y(i, j))});
        if (std::min({x, 1.0 - x, y, 1.0 - y}) >= delta - 1e-12)
          outside = std::max({outside, std::abs(kc.v.x(i, j)), std::abs(kc.v.y(i, j))});
      }
    CHECK(trace <= 1e-10 * max_abs(ub));
    CHECK(outside == 0.0);
    CHECK(max_abs(divergence(kc.v)) <= 1e-9 * max_abs(kc.v) / g->hx);
  }

  std::vector<double> ds, nv, ng;
  for (double d : {0.05, 0.1, 0.2}) {
    const CorrectorField kc = kato_corrector(ub, d, g);
    ds.push_back(std::log(d));
    nv.push_back(std::log(l2_norm(kc.v)));
    ng.push_back(std::log(gnorm(kc.v)));
  }
  auto slope = [&](const std::vector<double>& y) {
    const double mx = (ds[0] + ds[1] + ds[2]) / 3, my = (y[0] + y[1] + y[2]) / 3;
    double num = 0, den = 0;
    for (int i = 0; i < 3; ++i) {
      num += (ds[i] - mx) * (y[i] - my);
      den += (ds[i] - mx) * (ds[i] - mx);
    }
    return num / den;
  };
  CHECK(slope(nv) == doctest::Approx(0.5).epsilon(0.2));
  CHECK(slope(ng) == doctest::Approx(-0.5).epsilon(0.2));

  const CorrectorField a = kato_corrector(ub, 0.1, g), b = kato_corrector(2.0 * ub, 0.1, g);
  CHECK(max_diff(b.v, 2.0 * a.v) <= 1e-12 * max_abs(b.v));
}
