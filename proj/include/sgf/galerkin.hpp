#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "sgf/operators.hpp"
#include "sgf/rng.hpp"
#include "sgf/stokes.hpp"

namespace sgf {

enum class Scheme { em_ito, midpoint_strat };
std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

// Transport noise (the default) or state-independent additive forcing.
enum class NoiseForm { transport, additive };

struct SimConfig {
  double alpha = 0.1;
  double nu = 0.01;
  double nu_tilde = 0.01;
  int N = 16;
  double dt = 1e-3;
  double T = 0.5;
  Scheme scheme = Scheme::midpoint_strat;
  std::uint64_t seed = 1;
  int save_stride = 10;
  bool nonlinear = true;
  NoiseForm noise_form = NoiseForm::transport;
  double fixed_point_tol = 1e-12;
  int fixed_point_max = 50;
  double c_nu() const { return nu / (alpha * alpha); }
  double c_nu_tilde() const { return nu_tilde / (alpha * alpha); }
  long steps() const;
  void validate(int basis_size) const;
};

struct GalerkinState {
  double t = 0.0;
  Eigen::VectorXd c;
};

struct Trajectory {
  std::vector<double> t, normV2, normStar2, normH3s2, energy_residual, remainder_integral, grad2;
  std::vector<Eigen::VectorXd> states;
  bool blew_up = false;
  long steps_taken = 0;
  int max_fixed_point_iterations = 0;
  double max_noise_orthogonality = 0.0;  // max over steps of |sum_i g_i c_i / lambda_i| / (|g| |c|)
  double max_skew_defect = 0.0;          // max over steps of |b(u, u-a^2 lap u, u) + a^2 b(u, lap u, u)| terms
  std::string message;
};

// The truncated system in the W-basis. Every pairing is precomputed from grid
// quadrature of the basis fields, so each step only costs small dense algebra.
class GalerkinSystem {
 public:
  GalerkinSystem(const StokesEigenbasis& stokes, const WEigenbasis& basis, const NoiseModel& noise,
                 NoiseForm form = NoiseForm::transport, bool skew_form = true);

  int N() const { return n_; }
  int K() const { return static_cast<int>(noise_mats_.size()); }
  double alpha() const { return alpha_; }
  const Eigen::VectorXd& lambda() const { return lambda_; }

  // skew_form = false switches the quadratic term to the plain convective pairing, which breaks
  // its energy orthogonality; used to check that the invariant checks can fail.

  // Pieces of the drift: linear viscous part, quadratic nonlinearity, Ito corrector.
  Eigen::VectorXd viscous(const Eigen::VectorXd& c, double nu) const;
  Eigen::VectorXd quadratic(const Eigen::VectorXd& c) const;
  Eigen::VectorXd corrector(const Eigen::VectorXd& c, double nu_tilde) const;
  Eigen::VectorXd drift(const Eigen::VectorXd& c, const SimConfig& cfg, bool ito) const;
  Eigen::VectorXd diffusion(const Eigen::VectorXd& c, const SimConfig& cfg, int k) const;
  double remainder(const Eigen::VectorXd& c, double nu_tilde) const;

  double energy_V(const Eigen::VectorXd& c) const;  // sum c_i^2 / lambda_i
  double grad2(const Eigen::VectorXd& c) const { return c.dot(gram_grad_ * c); }
  double star2(const Eigen::VectorXd& c) const { return c.dot(gram_star_ * c); }
  double h3s2(const Eigen::VectorXd& c) const { return c.dot(gram_h3s_ * c); }
  double h2(const Eigen::VectorXd& c) const { return c.dot(gram_h_ * c); }

  // Mean V-energy input per unit time of the additive forcing.
  double additive_energy_rate(double nu_tilde) const;

  const Eigen::MatrixXd& noise_matrix(int k) const { return noise_mats_[k]; }
  const Eigen::MatrixXd& gram_grad() const { return gram_grad_; }
  const Eigen::MatrixXd& gram_h() const { return gram_h_; }
  NoiseForm form() const { return form_; }

 private:
  int n_ = 0;
  double alpha_ = 0.0;
  NoiseForm form_;
  Eigen::VectorXd lambda_;
  std::vector<Eigen::MatrixXd> quad_;        // quad_[i](j, l)
  std::vector<Eigen::MatrixXd> noise_mats_;  // b(sigma_k, e_j, e_i), antisymmetric
  std::vector<Eigen::VectorXd> additive_;    // <sigma_k, e_i>
  Eigen::MatrixXd corrector_;                // pairs <F(u), e_i>
  Eigen::MatrixXd remainder_;                // r(u) / nu_tilde as a quadratic form
  Eigen::MatrixXd gram_h_, gram_grad_, gram_star_, gram_h3s_;
};

GalerkinState project_initial(const VectorField& u0, const WEigenbasis& basis);
VectorField reconstruct(const GalerkinState& s, const WEigenbasis& basis);

// Single steps; the increments vector holds dW_k for this step.
Eigen::VectorXd step_em_ito(const GalerkinSystem& sys, const Eigen::VectorXd& c, const Eigen::VectorXd& dW,
                            const SimConfig& cfg);
struct MidpointResult {
  Eigen::VectorXd c;
  int iterations = 0;
  bool converged = true;
};
MidpointResult step_midpoint_strat(const GalerkinSystem& sys, const Eigen::VectorXd& c, const Eigen::VectorXd& dW,
                                   const SimConfig& cfg);

Trajectory simulate_path(const GalerkinSystem& sys, const SimConfig& cfg, const GalerkinState& initial,
                         const BrownianPath& path);

}  // namespace sgf
