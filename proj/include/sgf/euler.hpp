#pragma once

#include <vector>

#include "sgf/grid.hpp"
#include "sgf/table.hpp"

namespace sgf {

struct EulerTrajectory {
  std::vector<double> t;
  std::vector<ScalarField> omega;
  std::vector<VectorField> velocity;
  std::vector<double> energy;     // ||u||
  std::vector<double> enstrophy;  // ||omega||
  double max_divergence = 0.0;

  // Linear interpolation between stored samples; t is clamped to the stored range.
  VectorField velocity_at(double time) const;
  double energy_drift() const;
  double enstrophy_drift() const;
};

// Velocity with Dirichlet stream function: u = perp_grad(psi), lap(psi) = omega.
VectorField euler_velocity(const ScalarField& omega);

// Arakawa Jacobian psi_x w_y - psi_y w_x on interior nodes (zero on the boundary).
ScalarField arakawa_jacobian(const ScalarField& psi, const ScalarField& w);

// Vorticity transport with RK4 in time. Throws if dt max|u| / h > 0.5 at any stage.
EulerTrajectory solve_euler(const ScalarField& omega0, double T, double dt, int save_stride = 1);

// Reference Euler data: the lowest cellular mode plus a counter-rotating Gaussian pair,
// psi = cell b + pair b^3 (g1 - g2) with b = sin(pi x) sin(pi y). The cube keeps the vorticity
// zero on the walls; the velocity still slips there.
struct ReferenceFlow {
  double cell_amplitude = 1.0;
  double pair_amplitude = 0.4;
  double pair_radius = 0.3;
  double pair_offset = 0.2;  // horizontal distance of each vortex from the centre line
  double pair_height = 0.4;  // vertical position as a fraction of the height
};
ScalarField reference_stream(const GridPtr& g, const ReferenceFlow& flow = {});
ScalarField reference_vorticity(const GridPtr& g, const ReferenceFlow& flow = {});

// C3 ramp 0 -> 1 on [0, 1].
double septic_ramp(double s);

// No-slip initial data for second-grade runs: the stream function multiplied by a C3 wall ramp
// of width width_factor * alpha, so it vanishes together with its normal derivative.
VectorField make_initial_family(const ScalarField& stream, double alpha, double width_factor = 2.0);
// Same, with the stream function recovered from a slip velocity field.
VectorField make_initial_family(const VectorField& u_bar0, double alpha, double width_factor = 2.0);

// Columns: alpha, l2_gap2, alpha2_grad2, alpha6_h3s2. Flags: l2_decreasing, grad_decreasing, h3_bounded.
ResultTable verify_initial_scalings(const ScalarField& stream, const std::vector<double>& alphas,
                                    double width_factor = 2.0);

}  // namespace sgf
