#include "sgf/additive.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sgf/euler.hpp"

namespace sgf {

double AdditiveNoiseModel::curl_energy() const {
  double s = 0.0;
  for (const auto& c : curl) s += l2_inner(c, c);
  return s;
}

AdditiveNoiseModel additive_noise(const NoiseModel& noise) {
  AdditiveNoiseModel m;
  m.sigma = noise.sigma;
  for (const auto& s : noise.sigma) m.curl.push_back(curl2d(s));
  return m;
}

Trajectory simulate_velocity_additive(const GalerkinSystem& sys, const SimConfig& cfg, const GalerkinState& initial,
                                      const BrownianPath& path) {
  if (sys.form() != NoiseForm::additive) throw std::invalid_argument("system was built for transport noise");
  return simulate_path(sys, cfg, initial, path);
}

namespace {

struct Tendency {
  ScalarField rate;
  double damping = 0.0;  // <q - curl u, q>
  double speed = 0.0;    // max |u|
};

Tendency tendency(const ScalarField& q, const SimConfig& cfg, bool frozen) {
  const double damp = cfg.nu / (cfg.alpha * cfg.alpha);
  Tendency t;
  t.rate = ScalarField(q.grid, BcTag::free);
  ScalarField excess = q;
  if (!frozen) {
    const EllipticResult e = elliptic_solve(q, cfg.alpha);
    excess.values -= curl2d(e.u).values;
    t.speed = max_abs(e.u);
    if (cfg.nonlinear) t.rate.values = -arakawa_jacobian(e.phi, q).values;
  }
  t.rate.values -= damp * excess.values;
  t.damping = l2_inner(excess, q);
  return t;
}

}  // namespace

VorticityTrajectory simulate_vorticity_additive(const ScalarField& q0, const AdditiveNoiseModel& noise,
                                                const SimConfig& cfg, const BrownianPath& path,
                                                const VorticityOptions& opts) {
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(cfg.dt > 0.0) || cfg.dt > cfg.T) throw std::invalid_argument("need 0 < dt <= T");
  if (cfg.save_stride < 1) throw std::invalid_argument("save_stride must be at least 1");
  if (cfg.nu * cfg.dt / (cfg.alpha * cfg.alpha) > 0.5) throw std::invalid_argument("damping step nu dt / alpha^2 exceeds 0.5");
  const Grid& g = *q0.grid;
  const double h = std::min(g.hx, g.hy);
  const long S = cfg.steps();
  const double sn = std::sqrt(cfg.nu_tilde);
  const double forcing = cfg.nu_tilde * noise.curl_energy();
  const double damp2 = 2.0 * cfg.nu / (cfg.alpha * cfg.alpha);

  VorticityTrajectory tr;
  ScalarField q = with_tag(q0, BcTag::free);
  double drift = 0.0;
  auto record = [&](double t) {
    tr.t.push_back(t);
    tr.q_norm2.push_back(l2_inner(q, q));
    tr.drift_integral.push_back(drift);
    if (opts.keep_fields) tr.q.push_back(q);
  };

  record(0.0);
  ScalarField kick(q0.grid, BcTag::free), next = q, mid = q;
  for (long s = 0; s < S; ++s) {
    kick.values.setZero();
    for (int k = 0; k < noise.K(); ++k) kick.values += sn * path.increment(s, k) * noise.curl[k].values;
    next = q;
    const double scale = 1.0 + q.values.norm();
    Tendency f;
    bool converged = false;
    int it = 1;
    for (; it <= cfg.fixed_point_max; ++it) {
      mid.values = 0.5 * (q.values + next.values);
      f = tendency(mid, cfg, opts.frozen_velocity);
      const Eigen::VectorXd cand = q.values + cfg.dt * f.rate.values + kick.values;
      const double change = (cand - next.values).norm();
      next.values = cand;
      if (change <= cfg.fixed_point_tol * scale) {
        converged = true;
        break;
      }
    }
    tr.max_fixed_point_iterations = std::max(tr.max_fixed_point_iterations, std::min(it, cfg.fixed_point_max));
    if (!converged && tr.message.empty())
      tr.message = "fixed point did not converge at step " + std::to_string(s) + "; dt may be too large";
    if (cfg.dt * f.speed / h > 0.5) {
      tr.blew_up = true;
      tr.message = "CFL 0.5 exceeded at step " + std::to_string(s + 1);
      break;
    }
    if (!next.values.allFinite()) {
      tr.blew_up = true;
      tr.message = "non-finite vorticity at step " + std::to_string(s + 1);
      break;
    }
    drift += cfg.dt * (forcing - damp2 * f.damping);
    q = next;
    tr.steps_taken = s + 1;
    if ((s + 1) % cfg.save_stride == 0 || s + 1 == S) record(double(s + 1) * cfg.dt);
  }
  return tr;
}

EquivalenceReport check_equivalence(const StokesEigenbasis& stokes, const WEigenbasis& basis, const NoiseModel& noise,
                                    const SimConfig& cfg, const VectorField& u0, const BrownianPath& path) {
  const GalerkinSystem sys(stokes, basis, noise, NoiseForm::additive);
  const GalerkinState s0 = project_initial(u0, basis);
  const Trajectory vel = simulate_velocity_additive(sys, cfg, s0, path);
  const ScalarField q0 = curl_v(reconstruct(s0, basis), cfg.alpha);
  const VorticityTrajectory vor = simulate_vorticity_additive(q0, additive_noise(noise), cfg, path);

  EquivalenceReport r;
  if (vel.blew_up || vor.blew_up) r.message = vel.blew_up ? vel.message : vor.message;
  r.nx = basis.grid->nx;
  r.N = basis.size();
  r.dt = cfg.dt;
  const double q0n = l2_norm(q0);
  const std::size_t n = std::min(vel.t.size(), vor.t.size());
  for (std::size_t i = 0; i < n; ++i) {
    GalerkinState s{vel.t[i], vel.states[i]};
    const ScalarField d = curl_v(reconstruct(s, basis), cfg.alpha);
    ScalarField diff = d;
    diff.values -= vor.q[i].values;
    const double norm = q0n > 0.0 ? q0n : 1.0;
    const double rel = l2_norm(diff) / norm;
    const VectorField projected = reconstruct(project_initial(elliptic_K(vor.q[i], cfg.alpha), basis), basis);
    diff = curl_v(reconstruct(s, basis) - projected, cfg.alpha);
    const double prel = l2_norm(diff) / norm;
    r.t.push_back(vel.t[i]);
    r.discrepancy.push_back(rel);
    r.projected_discrepancy.push_back(prel);
    r.max_discrepancy = std::max(r.max_discrepancy, rel);
    r.max_projected_discrepancy = std::max(r.max_projected_discrepancy, prel);
  }
  return r;
}

EnergyLawReport check_vorticity_energy_law(const std::vector<VorticityTrajectory>& ensemble) {
  EnergyLawReport rep;
  rep.bins.columns = {"t", "mean_increment", "mean_drift", "se", "z"};
  rep.paths = static_cast<int>(ensemble.size());
  if (ensemble.empty()) return rep;
  std::size_t n = ensemble.front().t.size();
  for (const auto& tr : ensemble) n = std::min(n, tr.t.size());
  int within = 0, total = 0;
  const double P = double(ensemble.size());
  for (std::size_t b = 1; b < n; ++b) {
    double inc = 0.0, dr = 0.0, m = 0.0, m2 = 0.0;
    for (const auto& tr : ensemble) {
      const double di = tr.q_norm2[b] - tr.q_norm2[b - 1];
      const double dd = tr.drift_integral[b] - tr.drift_integral[b - 1];
      inc += di;
      dr += dd;
      m += di - dd;
      m2 += (di - dd) * (di - dd);
    }
    inc /= P;
    dr /= P;
    m /= P;
    const double var = ensemble.size() > 1 ? std::max(0.0, (m2 - P * m * m) / (P - 1.0)) : 0.0;
    const double se = std::sqrt(var / P);
    const double scale = std::max(std::abs(inc), std::abs(dr));
    double z = 0.0;
    if (se > 0.0) z = m / se;
    else if (std::abs(m) > 1e-9 * std::max(scale, 1e-300)) z = std::copysign(INFINITY, m);
    rep.bins.add_row({ensemble.front().t[b], inc, dr, se, z});
    ++total;
    if (std::abs(z) <= 3.0) ++within;
  }
  rep.fraction_within = total > 0 ? double(within) / total : 1.0;
  return rep;
}

ScalarField smooth_clamped_stream(const GridPtr& g, double amplitude) {
  const double pi = std::numbers::pi;
  const double lx = g->x(g->nx - 1), ly = g->y(g->ny - 1);
  return sample(
      g,
      [&](double x, double y) {
        const double a = std::sin(pi * x / lx) * std::sin(pi * y / ly);
        const double b = std::sin(2.0 * pi * x / lx) * std::sin(pi * y / ly);
        return amplitude * (a * a + 0.5 * b * b);
      },
      BcTag::clamped);
}

double h3_from_vorticity(const VectorField& u, const ScalarField& q, double alpha) {
  const double a2 = alpha * alpha;
  const double gu = std::sqrt(grad_inner(u, u));
  return l2_norm(q) / a2 + (1.0 + 1.0 / a2) * gu;
}

}  // namespace sgf
