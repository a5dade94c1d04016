#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgf/stokes.hpp"

namespace sgf {

// (f . grad) g, componentwise with g's stencils.
VectorField advect(const VectorField& f, const VectorField& g);

// Skew form 1/2 <(f.grad)g, h> - 1/2 <(f.grad)h, g>; skew = false gives the plain convective form.
double trilinear_b(const VectorField& f, const VectorField& g, const VectorField& h, bool skew = true);

// <B(u, v), w> with B(u, v) = curl(u - alpha^2 lap u) x v, written through b.
double b_hat_pairing(const VectorField& u, const VectorField& v, const VectorField& w, double alpha);
double b_hat_pairing(const VectorField& u, const VectorField& w, double alpha);
// The same pairing by direct quadrature of q (-v_y w_x + v_x w_y).
double b_hat_direct(const VectorField& u, const VectorField& v, const VectorField& w, double alpha);

enum class NoiseKind { bumps, eigen };

struct NoiseModel {
  NoiseKind kind = NoiseKind::bumps;
  int K = 0;
  double nu_tilde = 0.0;
  std::uint64_t seed = 0;
  std::vector<VectorField> sigma;
  std::vector<ScalarField> stream;
  std::vector<double> amplitude;
  std::vector<double> sup_norm;  // max |sigma_k|
  std::vector<double> w1_norm;   // max over values and first differences
};

std::string to_string(NoiseKind k);
NoiseKind noise_kind_from_string(const std::string& s);

// sigma_k = k^-2 perp_grad(psi_k), psi_k clamped and scaled so max |perp_grad psi_k| = 1.
// The eigen kind takes psi_k from the supplied Stokes basis.
NoiseModel build_noise_model(NoiseKind kind, int K, double nu_tilde, const GridPtr& grid,
                             std::uint64_t seed = 0, const StokesEigenbasis* stokes = nullptr);

VectorField G_k(const VectorField& u, const NoiseModel& noise, int k);
VectorField ito_corrector_F(const VectorField& u, const NoiseModel& noise, double alpha);

struct CorrectorField {
  double delta = 0.0;
  VectorField v;
  ScalarField cutoff;
  std::string profile = "quintic";
};

// chi(s) = 1 - 10 s^3 + 15 s^4 - 6 s^5 on [0, 1], zero beyond.
double quintic_cutoff(double s);
CorrectorField kato_corrector(const VectorField& u_bar, double delta, const GridPtr& grid);

}  // namespace sgf
