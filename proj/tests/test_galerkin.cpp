#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "sgf/galerkin.hpp"
#include "test_util.hpp"

using namespace sgf;
using namespace sgf::test;
using Eigen::VectorXd;

namespace {

struct Setup {
  GridPtr g = make_grid(33, 33);
  StokesEigenbasis st = stokes_eigensolve(g, 24);
  WEigenbasis wb = w_basis(st, 8, 0.1);
  NoiseModel noise = build_noise_model(NoiseKind::bumps, 3, 0.01, g, 2);
  GalerkinSystem sys{st, wb, noise};
};

const Setup& setup() {
  static const Setup s;
  return s;
}

VectorXd random_state(int n, std::uint64_t id, double scale = 1.0) {
  VectorXd c(n);
  for (int i = 0; i < n; ++i) c[i] = scale * std_normal(31, id, 0, i);
  return c;
}

SimConfig base_config() {
  SimConfig cfg;
  cfg.alpha = 0.1;
  cfg.N = 8;
  cfg.nu = 0.01;
  cfg.nu_tilde = 0.01;
  cfg.dt = 1e-3;
  cfg.T = 0.2;
  cfg.save_stride = 10;
  return cfg;
}

// Energy pairing used by the V-norm in W-basis coordinates.
double epair(const VectorXd& a, const VectorXd& c, const VectorXd& lambda) { return a.cwiseQuotient(lambda).dot(c); }

}  // namespace

TEST_CASE("scheme and config helpers") {
  CHECK(scheme_from_string(to_string(Scheme::em_ito)) == Scheme::em_ito);
  CHECK(scheme_from_string(to_string(Scheme::midpoint_strat)) == Scheme::midpoint_strat);
  CHECK_THROWS(scheme_from_string("rk4"));
  SimConfig cfg = base_config();
  CHECK(cfg.steps() == 200);
  CHECK_NOTHROW(cfg.validate(8));
  CHECK_THROWS(cfg.validate(4));
  SimConfig bad = cfg;
  bad.alpha = 0.0;
  CHECK_THROWS(bad.validate(8));
  bad = cfg;
  bad.nu = -1.0;
  CHECK_THROWS(bad.validate(8));
  bad = cfg;
  bad.dt = 0.3;
  CHECK_THROWS(bad.validate(8));
  bad = cfg;
  bad.T = 0.2005;
  CHECK_THROWS(bad.validate(8));
  bad = cfg;
  bad.save_stride = 0;
  CHECK_THROWS(bad.validate(8));
  CHECK(cfg.c_nu() == doctest::Approx(1.0));
}

TEST_CASE("brownian increments") {
  BrownianPath fine{5, 2, 0.5e-3, 0}, coarse{5, 2, 1e-3, 1};
  for (long s = 0; s < 50; ++s)
    for (int k = 0; k < 3; ++k)
      CHECK(coarse.increment(s, k) == doctest::Approx(fine.increment(2 * s, k) + fine.increment(2 * s + 1, k)).epsilon(1e-13));
  CHECK(coarse.increment(3, 1) == coarse.increment(3, 1));
  BrownianPath other{5, 3, 1e-3, 1};
  CHECK(other.increment(3, 1) != coarse.increment(3, 1));
  double m = 0, v = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = std_normal(1, 0, i, 0);
    m += z;
    v += z * z;
  }
  m /= n;
  v = v / n - m * m;
  CHECK(std::abs(m) < 4.0 / std::sqrt(double(n)));
  CHECK(std::abs(v - 1.0) < 0.05);
}

TEST_CASE("project_initial and reconstruct") {
  const Setup& s = setup();
  const VectorField zero(s.g, BcTag::dirichlet);
  CHECK(project_initial(zero, s.wb).c.norm() == 0.0);
  for (int j = 0; j < s.wb.size(); ++j) {
    const VectorXd c = project_initial(s.wb.fields[j], s.wb).c;
    CHECK((c - VectorXd::Unit(s.wb.size(), j)).norm() <= 1e-8);
  }
  const VectorXd c = random_state(8, 1);
  const GalerkinState back = project_initial(reconstruct({0.0, c}, s.wb), s.wb);
  CHECK((back.c - c).norm() <= 1e-8 * c.norm());
}

TEST_CASE("drift and noise are energy-orthogonal") {
  const Setup& s = setup();
  const VectorXd& lam = s.sys.lambda();
  SimConfig cfg = base_config();
  for (std::uint64_t id = 0; id < 20; ++id) {
    const VectorXd c = random_state(8, id);
    const VectorXd q = s.sys.quadratic(c);
    CHECK(std::abs(epair(q, c, lam)) <= 1e-12 * q.norm() * c.norm() / lam.minCoeff());
    for (int k = 0; k < s.sys.K(); ++k) {
      const VectorXd d = s.sys.diffusion(c, cfg, k);
      CHECK(std::abs(epair(d, c, lam)) <= 1e-13 * (d.norm() + 1.0) * c.norm());
      CHECK((s.sys.noise_matrix(k) + s.sys.noise_matrix(k).transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
    // Viscous dissipation equals nu |grad u|^2 in the energy pairing.
    CHECK(epair(s.sys.viscous(c, 0.01), c, lam) == doctest::Approx(-0.01 * s.sys.grad2(c)).epsilon(1e-12));
  }
  // The plain convective form loses the cancellation.
  const GalerkinSystem plain(s.st, s.wb, s.noise, NoiseForm::transport, false);
  double worst = 0.0;
  for (std::uint64_t id = 0; id < 20; ++id) {
    const VectorXd c = random_state(8, id);
    const VectorXd q = plain.quadratic(c);
    worst = std::max(worst, std::abs(epair(q, c, lam)) / (q.norm() * c.norm()));
  }
  CHECK(worst > 1e-8);
}

TEST_CASE("drift pieces are homogeneous") {
  const Setup& s = setup();
  SimConfig cfg = base_config();
  const VectorXd c = random_state(8, 4);
  CHECK((s.sys.viscous(2 * c, 0.01) - 2 * s.sys.viscous(c, 0.01)).norm() <= 1e-13 * s.sys.viscous(c, 0.01).norm());
  CHECK((s.sys.quadratic(2 * c) - 4 * s.sys.quadratic(c)).norm() <= 1e-13 * s.sys.quadratic(c).norm() * 4);
  CHECK((s.sys.corrector(2 * c, 0.01) - 2 * s.sys.corrector(c, 0.01)).norm() <= 1e-13 * s.sys.corrector(c, 0.01).norm() * 2);
  const VectorXd full = s.sys.drift(c, cfg, true);
  CHECK((full - s.sys.viscous(c, 0.01) - s.sys.quadratic(c) - s.sys.corrector(c, 0.01)).norm() <= 1e-13 * full.norm());
  CHECK((s.sys.drift(c, cfg, false) - s.sys.viscous(c, 0.01) - s.sys.quadratic(c)).norm() <= 1e-13 * full.norm());
  cfg.nonlinear = false;
  CHECK((s.sys.drift(c, cfg, false) - s.sys.viscous(c, 0.01)).norm() == 0.0);
  // The Ito corrector dissipates energy.
  CHECK(epair(s.sys.corrector(c, 0.01), c, s.sys.lambda()) <= 0.0);
  cfg.nu_tilde = 0.04;
  const VectorXd d1 = s.sys.diffusion(c, cfg, 1);
  cfg.nu_tilde = 0.01;
  CHECK((d1 - 2 * s.sys.diffusion(c, cfg, 1)).norm() <= 1e-14 * d1.norm());
  cfg.nu_tilde = 0.0;
  CHECK(s.sys.diffusion(c, cfg, 0).norm() == 0.0);
}

TEST_CASE("additive form") {
  const Setup& s = setup();
  const GalerkinSystem add(s.st, s.wb, s.noise, NoiseForm::additive);
  SimConfig cfg = base_config();
  const VectorXd c = random_state(8, 2);
  CHECK(add.diffusion(c, cfg, 0) == add.diffusion(2 * c, cfg, 0));
  CHECK(add.corrector(c, 0.01).norm() == 0.0);
  CHECK(add.remainder(c, 0.01) == 0.0);
  double rate = 0.0;
  for (int k = 0; k < add.K(); ++k) {
    const VectorXd d = add.diffusion(c, cfg, k);
    rate += epair(d, d, add.lambda());
  }
  CHECK(add.additive_energy_rate(0.01) == doctest::Approx(rate).epsilon(1e-12));
}

TEST_CASE("Euler-Maruyama step is the explicit update") {
  const Setup& s = setup();
  const SimConfig cfg = base_config();
  const VectorXd c = random_state(8, 5), dW = random_state(3, 6, 0.03);
  VectorXd expect = c + cfg.dt * s.sys.drift(c, cfg, true);
  for (int k = 0; k < 3; ++k) expect += dW[k] * s.sys.diffusion(c, cfg, k);
  CHECK((step_em_ito(s.sys, c, dW, cfg) - expect).norm() == 0.0);
  SimConfig lin = cfg;
  lin.nonlinear = false;
  lin.nu_tilde = 0.0;
  CHECK((step_em_ito(s.sys, c, VectorXd::Zero(3), lin) - (c + lin.dt * s.sys.viscous(c, lin.nu))).norm() == 0.0);
}

TEST_CASE("midpoint step solves the implicit equation") {
  const Setup& s = setup();
  const SimConfig cfg = base_config();
  const VectorXd c = random_state(8, 7), dW = random_state(3, 8, 0.03);
  const MidpointResult r = step_midpoint_strat(s.sys, c, dW, cfg);
  CHECK(r.converged);
  const VectorXd mid = 0.5 * (c + r.c);
  VectorXd rhs = c + cfg.dt * s.sys.drift(mid, cfg, false);
  for (int k = 0; k < 3; ++k) rhs += dW[k] * s.sys.diffusion(mid, cfg, k);
  CHECK((r.c - rhs).norm() <= 1e-10 * (1 + c.norm()));
  SimConfig tight = cfg;
  tight.fixed_point_max = 1;
  CHECK_FALSE(step_midpoint_strat(s.sys, c, dW, tight).converged);
}

TEST_CASE("linear deterministic decay matches the matrix exponential") {
  const Setup& s = setup();
  SimConfig cfg = base_config();
  cfg.nonlinear = false;
  cfg.nu_tilde = 0.0;
  cfg.T = 0.5;
  const VectorXd c0 = random_state(8, 9);
  const Eigen::MatrixXd A = -cfg.nu * s.sys.lambda().asDiagonal() * s.sys.gram_grad();
  const VectorXd exact = (A * cfg.T).exp() * c0;
  auto err = [&](double dt, Scheme sch) {
    SimConfig c = cfg;
    c.dt = dt;
    c.scheme = sch;
    c.save_stride = 1000000;
    const Trajectory tr = simulate_path(s.sys, c, {0.0, c0}, BrownianPath{1, 0, dt, 0});
    return (tr.states.back() - exact).norm() / exact.norm();
  };
  const double m1 = err(0.01, Scheme::midpoint_strat), m2 = err(0.005, Scheme::midpoint_strat);
  CHECK(m1 < 1e-3);
  CHECK(m1 / m2 == doctest::Approx(4.0).epsilon(0.1));
  const double e1 = err(0.002, Scheme::em_ito), e2 = err(0.001, Scheme::em_ito);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("midpoint conserves energy without viscosity and obeys the energy law with it") {
  const Setup& s = setup();
  SimConfig cfg = base_config();
  cfg.nu = 0.0;
  cfg.nu_tilde = 0.05;
  const GalerkinState c0{0.0, random_state(8, 10)};
  const Trajectory tr = simulate_path(s.sys, cfg, c0, BrownianPath{1, 4, cfg.dt, 0});
  REQUIRE_FALSE(tr.blew_up);
  for (double e : tr.normV2) CHECK(std::abs(e - tr.normV2.front()) <= 1e-8 * tr.normV2.front());
  CHECK(tr.max_noise_orthogonality <= 1e-12);
  CHECK(tr.max_skew_defect <= 1e-12);
  cfg.nu = 0.02;
  const Trajectory v = simulate_path(s.sys, cfg, c0, BrownianPath{1, 4, cfg.dt, 0});
  for (double r : v.energy_residual) CHECK(std::abs(r) <= 1e-8 * v.normV2.front());
  CHECK(v.normV2.back() < v.normV2.front());
  CHECK(v.t.size() == 21);
  CHECK(v.t.back() == doctest::Approx(cfg.T));
}

TEST_CASE("Euler-Maruyama energy law converges under refinement") {
  const Setup& s = setup();
  SimConfig cfg = base_config();
  cfg.scheme = Scheme::em_ito;
  cfg.nu_tilde = 0.05;
  auto mean_abs = [&](double dt) {
    SimConfig c = cfg;
    c.dt = dt;
    c.save_stride = 1000000;
    double m = 0.0;
    for (std::uint64_t p = 0; p < 16; ++p) {
      const GalerkinState c0{0.0, random_state(8, 10)};
      const Trajectory tr = simulate_path(s.sys, c, c0, BrownianPath{3, p, dt, dt < 2e-3 ? 0 : 1});
      m += std::abs(tr.energy_residual.back()) / tr.normV2.front();
    }
    return m / 16;
  };
  const double r1 = mean_abs(2e-3), r2 = mean_abs(1e-3);
  CHECK(r1 < 5e-2);
  CHECK(r1 / r2 >= 1.3);
}

TEST_CASE("Euler-Maruyama converges strongly on a fixed path") {
  const Setup& s = setup();
  SimConfig cfg = base_config();
  cfg.scheme = Scheme::em_ito;
  cfg.nu_tilde = 0.05;
  cfg.T = 0.1;
  cfg.save_stride = 1000000;
  auto run = [&](std::uint64_t p, int refine) {
    SimConfig c = cfg;
    c.dt = 4e-3 / double(1 << refine);
    return simulate_path(s.sys, c, {0.0, random_state(8, 11)}, BrownianPath{9, p, c.dt, 4 - refine}).states.back();
  };
  double e0 = 0.0, e1 = 0.0;
  for (std::uint64_t p = 0; p < 16; ++p) {
    const VectorXd ref = run(p, 4);
    e0 += (run(p, 0) - ref).norm();
    e1 += (run(p, 2) - ref).norm();
  }
  // Four times smaller steps: order one half predicts a factor two.
  CHECK(e0 / e1 >= 1.6);
}

TEST_CASE("finite-N remainder") {
  const Setup& s = setup();
  const NoiseModel none = build_noise_model(NoiseKind::bumps, 0, 0.01, s.g, 2);
  const GalerkinSystem quiet(s.st, s.wb, none);
  const VectorXd c = random_state(8, 12);
  CHECK(quiet.remainder(c, 0.01) == 0.0);
  CHECK(quiet.corrector(c, 0.01).norm() == 0.0);

  const WEigenbasis big = w_basis(s.st, 16, 0.1);
  const GalerkinSystem wide(s.st, big, s.noise);
  for (std::uint64_t id = 0; id < 20; ++id) {
    const VectorXd a = random_state(8, 100 + id);
    VectorXd b = VectorXd::Zero(16);
    b.head(8) = a;
    const double r8 = s.sys.remainder(a, 0.01), r16 = wide.remainder(b, 0.01);
    CHECK(r8 <= 1e-14 * a.squaredNorm());
    CHECK(r16 <= 1e-14 * a.squaredNorm());
    CHECK(r16 >= r8 - 1e-14 * a.squaredNorm());
  }
}

TEST_CASE("simulation is deterministic and flags blow-up") {
  const Setup& s = setup();
  SimConfig cfg = base_config();
  const GalerkinState c0{0.0, random_state(8, 13)};
  const Trajectory a = simulate_path(s.sys, cfg, c0, BrownianPath{1, 2, cfg.dt, 0});
  const Trajectory b = simulate_path(s.sys, cfg, c0, BrownianPath{1, 2, cfg.dt, 0});
  REQUIRE(a.states.size() == b.states.size());
  for (size_t i = 0; i < a.states.size(); ++i) CHECK(a.states[i] == b.states[i]);
  CHECK(a.energy_residual == b.energy_residual);

  cfg.scheme = Scheme::em_ito;
  cfg.dt = 0.05;
  cfg.T = 1.0;
  const Trajectory blow = simulate_path(s.sys, cfg, {0.0, random_state(8, 14, 1e4)}, BrownianPath{1, 2, cfg.dt, 0});
  CHECK(blow.blew_up);
  CHECK(blow.message.find("blow-up") != std::string::npos);
  CHECK_THROWS(simulate_path(s.sys, cfg, {0.0, VectorXd::Zero(3)}, BrownianPath{}));
}
