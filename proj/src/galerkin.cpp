#include "sgf/galerkin.hpp"

#include <cmath>
#include <stdexcept>

namespace sgf {

std::string to_string(Scheme s) { return s == Scheme::em_ito ? "em_ito" : "midpoint_strat"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "em_ito") return Scheme::em_ito;
  if (s == "midpoint_strat") return Scheme::midpoint_strat;
  throw std::invalid_argument("unknown scheme: " + s);
}

long SimConfig::steps() const { return std::lround(T / dt); }

void SimConfig::validate(int basis_size) const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (nu < 0.0 || nu_tilde < 0.0) throw std::invalid_argument("viscosities must be nonnegative");
  if (!(dt > 0.0) || dt > T) throw std::invalid_argument("need 0 < dt <= T");
  if (N < 1 || N > basis_size) throw std::invalid_argument("N exceeds the basis size");
  if (save_stride < 1) throw std::invalid_argument("save_stride must be at least 1");
  if (std::abs(steps() * dt - T) > 1e-9 * T) throw std::invalid_argument("T must be a multiple of dt");
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Columns [f.x; f.y] for each field.
MatrixXd stack(const std::vector<VectorField>& fs) {
  const Eigen::Index n = fs.front().grid()->size();
  MatrixXd m(2 * n, static_cast<Eigen::Index>(fs.size()));
  for (std::size_t j = 0; j < fs.size(); ++j) {
    m.col(j).head(n) = fs[j].x.values;
    m.col(j).tail(n) = fs[j].y.values;
  }
  return m;
}

// out[g](f, h) = <(f . grad) g, h>, with g differenced by its own stencils.
std::vector<MatrixXd> advect_tensor(const std::vector<VectorField>& F, const std::vector<VectorField>& G,
                                    const std::vector<VectorField>& H) {
  const Grid& grid = *F.front().grid();
  const Eigen::Index n = grid.size();
  const MatrixXd Fm = stack(F);
  const MatrixXd Hm = stack(H);
  const auto& w = grid.weights;
  std::vector<MatrixXd> out;
  out.reserve(G.size());
  VectorXd gxx(n), gxy(n), gyx(n), gyy(n);
  MatrixXd S(2 * n, Hm.cols());
  for (const auto& g : G) {
    diff_x(grid, g.x.values.data(), g.x.tag, gxx.data());
    diff_y(grid, g.x.values.data(), g.x.tag, gxy.data());
    diff_x(grid, g.y.values.data(), g.y.tag, gyx.data());
    diff_y(grid, g.y.values.data(), g.y.tag, gyy.data());
    for (Eigen::Index h = 0; h < Hm.cols(); ++h) {
      const auto hx = Hm.col(h).head(n).array();
      const auto hy = Hm.col(h).tail(n).array();
      S.col(h).head(n) = (w.array() * (gxx.array() * hx + gyx.array() * hy)).matrix();
      S.col(h).tail(n) = (w.array() * (gxy.array() * hx + gyy.array() * hy)).matrix();
    }
    out.push_back(Fm.transpose() * S);
  }
  return out;
}

// Skew pairing b(f_a, g_b, h_c) assembled from two advect tensors:
// b = 1/2 <(f.grad)g, h> - 1/2 <(f.grad)h, g>.
// With skew off only the convective half is kept, doubled.
double pair(const std::vector<MatrixXd>& agh, const std::vector<MatrixXd>& ahg, int f, int g, int h, bool skew) {
  if (!skew) return agh[g](f, h);
  return 0.5 * agh[g](f, h) - 0.5 * ahg[h](f, g);
}

}  // namespace

GalerkinSystem::GalerkinSystem(const StokesEigenbasis& stokes, const WEigenbasis& basis, const NoiseModel& noise,
                               NoiseForm form, bool skew_form)
    : n_(basis.size()), alpha_(basis.alpha), form_(form) {
  if (n_ == 0) throw std::invalid_argument("empty W-basis");
  check_same_grid(stokes.grid, basis.grid);
  const auto& E = basis.fields;
  const int m = stokes.size();
  const double a2 = alpha_ * alpha_;
  lambda_ = Eigen::Map<const VectorXd>(basis.eigenvalues.data(), n_);

  std::vector<VectorField> L;
  std::vector<ScalarField> qa, q1;
  for (const auto& e : E) {
    L.push_back(laplacian(e));
    qa.push_back(curl_v(e, alpha_));
    q1.push_back(curl_v(e, 1.0));
  }

  gram_h_.resize(n_, n_);
  gram_grad_.resize(n_, n_);
  gram_star_.resize(n_, n_);
  gram_h3s_.resize(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j <= i; ++j) {
      const double h = l2_inner(E[i], E[j]), gr = grad_inner(E[i], E[j]);
      gram_h_(i, j) = gram_h_(j, i) = h;
      gram_grad_(i, j) = gram_grad_(j, i) = gr;
      gram_star_(i, j) = gram_star_(j, i) = l2_inner(qa[i], qa[j]);
      gram_h3s_(i, j) = gram_h3s_(j, i) = h + gr + l2_inner(q1[i], q1[j]);
    }

  // Quadratic term: quad_i(j, l) = b(e_j, e_l, e_i) - a2 b(e_j, L_l, e_i) + a2 b(e_i, L_l, e_j).
  const auto AEE = advect_tensor(E, E, E);
  const auto ALE = advect_tensor(E, L, E);
  const auto AEL = advect_tensor(E, E, L);
  quad_.assign(n_, MatrixXd::Zero(n_, n_));
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int l = 0; l < n_; ++l)
        quad_[i](j, l) = pair(AEE, AEE, j, l, i, skew_form) - a2 * pair(ALE, AEL, j, l, i, skew_form) +
                         a2 * pair(ALE, AEL, i, l, j, skew_form);

  // Noise: B_k(i, j) = b(sigma_k, e_j, e_i), antisymmetric by construction. The corrector and
  // the remainder need the V-Riesz lift of b(sigma_k, u, .), taken over the whole Stokes span.
  const int K = noise.K;
  if (K > 0) check_same_grid(noise.sigma.front().grid(), basis.grid);
  const Eigen::LDLT<MatrixXd> gv(basis.gram_V);
  const auto SEE = K > 0 ? advect_tensor(noise.sigma, E, E) : std::vector<MatrixXd>{};
  const auto SES = K > 0 ? advect_tensor(noise.sigma, E, stokes.modes) : std::vector<MatrixXd>{};
  const auto SSE = K > 0 ? advect_tensor(noise.sigma, stokes.modes, E) : std::vector<MatrixXd>{};
  corrector_ = MatrixXd::Zero(n_, n_);
  remainder_ = MatrixXd::Zero(n_, n_);
  for (int k = 0; k < K; ++k) {
    MatrixXd B(n_, n_), H(m, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) B(i, j) = 0.5 * SEE[j](k, i) - 0.5 * SEE[i](k, j);
    for (int a = 0; a < m; ++a)
      for (int j = 0; j < n_; ++j) H(a, j) = 0.5 * SES[j](k, a) - 0.5 * SSE[a](k, j);
    const MatrixXd lifted = H.transpose() * gv.solve(H);
    corrector_ -= 0.5 * lifted;
    remainder_ -= lifted - B.transpose() * lambda_.asDiagonal() * B;
    noise_mats_.push_back(std::move(B));
    VectorXd add(n_);
    for (int i = 0; i < n_; ++i) add[i] = l2_inner(noise.sigma[k], E[i]);
    additive_.push_back(std::move(add));
  }
  corrector_ = 0.5 * (corrector_ + corrector_.transpose()).eval();
  remainder_ = 0.5 * (remainder_ + remainder_.transpose()).eval();
}

Eigen::VectorXd GalerkinSystem::viscous(const VectorXd& c, double nu) const {
  return -nu * lambda_.cwiseProduct(gram_grad_ * c);
}

Eigen::VectorXd GalerkinSystem::quadratic(const VectorXd& c) const {
  VectorXd q(n_);
  for (int i = 0; i < n_; ++i) q[i] = -lambda_[i] * c.dot(quad_[i] * c);
  return q;
}

Eigen::VectorXd GalerkinSystem::corrector(const VectorXd& c, double nu_tilde) const {
  if (form_ == NoiseForm::additive || noise_mats_.empty()) return VectorXd::Zero(n_);
  return nu_tilde * lambda_.cwiseProduct(corrector_ * c);
}

Eigen::VectorXd GalerkinSystem::drift(const VectorXd& c, const SimConfig& cfg, bool ito) const {
  VectorXd d = viscous(c, cfg.nu);
  if (cfg.nonlinear) d += quadratic(c);
  if (ito) d += corrector(c, cfg.nu_tilde);
  return d;
}

Eigen::VectorXd GalerkinSystem::diffusion(const VectorXd& c, const SimConfig& cfg, int k) const {
  const double s = std::sqrt(cfg.nu_tilde);
  if (form_ == NoiseForm::additive) return s * lambda_.cwiseProduct(additive_.at(k));
  return s * lambda_.cwiseProduct(noise_mats_.at(k) * c);
}

double GalerkinSystem::remainder(const VectorXd& c, double nu_tilde) const {
  if (form_ == NoiseForm::additive) return 0.0;
  return nu_tilde * c.dot(remainder_ * c);
}

double GalerkinSystem::energy_V(const VectorXd& c) const { return c.cwiseAbs2().cwiseQuotient(lambda_).sum(); }

double GalerkinSystem::additive_energy_rate(double nu_tilde) const {
  double s = 0.0;
  for (const auto& a : additive_) s += a.cwiseAbs2().cwiseProduct(lambda_).sum();
  return nu_tilde * s;
}

GalerkinState project_initial(const VectorField& u0, const WEigenbasis& basis) {
  check_same_grid(u0.grid(), basis.grid);
  GalerkinState s;
  s.c.resize(basis.size());
  // <u0, e_i>_W = lambda_i <u0, e_i>_V holds for every u0 in the continuum but only inside the
  // Stokes span discretely; the V form is the one that stays stable for data with thin wall layers.
  for (int i = 0; i < basis.size(); ++i)
    s.c[i] = basis.eigenvalues[i] * inner_V(u0, basis.fields[i], basis.alpha);
  return s;
}

VectorField reconstruct(const GalerkinState& s, const WEigenbasis& basis) {
  return span_field(basis.fields, s.c);
}

Eigen::VectorXd step_em_ito(const GalerkinSystem& sys, const VectorXd& c, const VectorXd& dW, const SimConfig& cfg) {
  VectorXd next = c + cfg.dt * sys.drift(c, cfg, true);
  for (int k = 0; k < sys.K(); ++k) next += dW[k] * sys.diffusion(c, cfg, k);
  return next;
}

MidpointResult step_midpoint_strat(const GalerkinSystem& sys, const VectorXd& c, const VectorXd& dW,
                                   const SimConfig& cfg) {
  MidpointResult r;
  r.c = c;
  const double scale = 1.0 + c.norm();
  for (r.iterations = 1; r.iterations <= cfg.fixed_point_max; ++r.iterations) {
    const VectorXd mid = 0.5 * (c + r.c);
    VectorXd next = c + cfg.dt * sys.drift(mid, cfg, false);
    for (int k = 0; k < sys.K(); ++k) next += dW[k] * sys.diffusion(mid, cfg, k);
    const double change = (next - r.c).norm();
    r.c = std::move(next);
    if (change <= cfg.fixed_point_tol * scale) return r;
  }
  r.iterations = cfg.fixed_point_max;
  r.converged = false;
  return r;
}

Trajectory simulate_path(const GalerkinSystem& sys, const SimConfig& cfg, const GalerkinState& initial,
                         const BrownianPath& path) {
  cfg.validate(sys.N());
  if (initial.c.size() != sys.N()) throw std::invalid_argument("initial state does not match the basis");
  const bool ito = cfg.scheme == Scheme::em_ito;
  const long S = cfg.steps();
  Trajectory tr;
  VectorXd c = initial.c;
  const double e0 = sys.energy_V(c);
  double dissipated = 0.0, rem = 0.0;
  VectorXd dW(sys.K());

  auto record = [&](double t) {
    const double e = sys.energy_V(c);
    tr.t.push_back(t);
    tr.normV2.push_back(e);
    tr.normStar2.push_back(sys.star2(c));
    tr.normH3s2.push_back(sys.h3s2(c));
    tr.grad2.push_back(sys.grad2(c));
    tr.remainder_integral.push_back(rem);
    // The implicit midpoint integrates the projected Stratonovich system, whose energy law has no
    // remainder; the Ito scheme carries the corrector of the full system and so picks it up.
    tr.energy_residual.push_back(e + 2.0 * cfg.nu * dissipated - e0 - (ito ? rem : 0.0));
    tr.states.push_back(c);
  };
  auto orthogonality = [&](const VectorXd& u) {
    const double cn = u.norm();
    if (cn == 0.0) return;
    for (int k = 0; k < sys.K(); ++k) {
      const VectorXd g = sys.diffusion(u, cfg, k);
      const double gn = g.norm();
      if (gn > 0.0 && sys.form() == NoiseForm::transport)
        tr.max_noise_orthogonality =
            std::max(tr.max_noise_orthogonality, std::abs(g.cwiseQuotient(sys.lambda()).dot(u)) / (gn * cn));
    }
    if (cfg.nonlinear) {
      const VectorXd q = sys.quadratic(u);
      const double qn = q.norm();
      if (qn > 0.0)
        tr.max_skew_defect = std::max(tr.max_skew_defect, std::abs(q.cwiseQuotient(sys.lambda()).dot(u)) / (qn * cn));
    }
  };

  record(0.0);
  for (long s = 0; s < S; ++s) {
    for (int k = 0; k < sys.K(); ++k) dW[k] = path.increment(s, k);
    VectorXd next;
    if (ito) {
      orthogonality(c);
      dissipated += cfg.dt * sys.grad2(c);
      rem += cfg.dt * sys.remainder(c, cfg.nu_tilde);
      next = step_em_ito(sys, c, dW, cfg);
    } else {
      MidpointResult m = step_midpoint_strat(sys, c, dW, cfg);
      tr.max_fixed_point_iterations = std::max(tr.max_fixed_point_iterations, m.iterations);
      if (!m.converged && tr.message.empty())
        tr.message = "fixed point did not converge at step " + std::to_string(s) + "; dt may be too large";
      const VectorXd mid = 0.5 * (c + m.c);
      orthogonality(mid);
      dissipated += cfg.dt * sys.grad2(mid);
      rem += cfg.dt * sys.remainder(mid, cfg.nu_tilde);
      next = std::move(m.c);
    }
    tr.steps_taken = s + 1;
    const double e = sys.energy_V(next);
    if (!next.allFinite() || !(e <= 1e8 * std::max(e0, 1.0))) {
      tr.blew_up = true;
      tr.message = "blow-up at step " + std::to_string(s + 1);
      break;
    }
    c = std::move(next);
    if ((s + 1) % cfg.save_stride == 0 || s + 1 == S) record(double(s + 1) * cfg.dt);
  }
  return tr;
}

}  // namespace sgf
