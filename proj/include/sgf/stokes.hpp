#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "sgf/grid.hpp"

namespace sgf {

using SpMat = Eigen::SparseMatrix<double>;

inline constexpr double kTolEig = 1e-8;
inline constexpr double kTolSolve = 1e-11;

// Maps interior nodes to unknown indices for stream-function solves.
struct InteriorIndex {
  explicit InteriorIndex(const Grid& g);
  int count() const { return n; }
  Eigen::VectorXd gather(const ScalarField& f) const;
  ScalarField scatter(const GridPtr& g, const Eigen::VectorXd& v, BcTag tag) const;
  std::vector<int> node_of;  // unknown -> node
  std::vector<int> unknown_of;  // node -> unknown or -1
  int n = 0;
};

// Sparse assemblies over interior unknowns (boundary values zero).
struct StreamOperators {
  explicit StreamOperators(GridPtr g);
  GridPtr grid;
  InteriorIndex index;
  SpMat lap_clamped;  // all nodes x unknowns: 5-point Laplacian with ghost reflection
  SpMat stiffness;    // <grad psi, grad phi>, 5-point, SPD
  SpMat bending;      // <lap psi, lap phi> with clamped ghosts, SPD
  SpMat matched;      // unknowns x unknowns: dx(dx)+dy(dy) with one-sided closures
};

std::shared_ptr<const StreamOperators> stream_operators(const GridPtr& g);

// Solves lap(phi) - alpha^2 bih(phi) = q with phi clamped (alpha > 0) or
// Dirichlet (alpha = 0). Factorisations are cached per (grid, alpha).
struct EllipticResult {
  ScalarField phi;
  VectorField u;
  double residual = 0.0;
};

EllipticResult elliptic_solve(const ScalarField& q, double alpha);
VectorField elliptic_K(const ScalarField& q, double alpha);

// Dirichlet Poisson solve with the matched Laplacian: matched_laplacian(psi) = rhs.
ScalarField matched_poisson(const ScalarField& rhs);
// Dirichlet Poisson solve with the 5-point Laplacian.
ScalarField poisson_dirichlet(const ScalarField& rhs);

VectorField leray_project(const VectorField& f);
VectorField resolvent_solve(const VectorField& f, double alpha);

// v = u - alpha^2 lap(u); returns curl(v).
ScalarField curl_v(const VectorField& u, double alpha);

double norm_H(const VectorField& u);
double norm_V(const VectorField& u, double alpha);
double norm_star(const VectorField& u, double alpha);
double norm_W(const VectorField& u, double alpha);
double norm_H3s(const VectorField& u);
double inner_V(const VectorField& u, const VectorField& w, double alpha);
double inner_W(const VectorField& u, const VectorField& w, double alpha);

struct StokesEigenbasis {
  GridPtr grid;
  std::vector<double> eigenvalues;        // velocity-form Ritz values, ascending
  std::vector<double> pencil_eigenvalues;  // stream-function pencil values (empty when loaded)
  std::vector<ScalarField> stream;         // clamped stream functions
  std::vector<VectorField> modes;          // perp_grad(stream), H-orthonormal
  std::vector<int> clustered;              // 1 where a near-degenerate partner exists
  int iterations = 0;
  int size() const { return static_cast<int>(eigenvalues.size()); }
};

struct EigenOptions {
  int max_iterations = 1000;
  double tol = kTolEig;
  std::uint64_t seed = 12345;
};

StokesEigenbasis stokes_eigensolve(const GridPtr& grid, int n, const EigenOptions& opts = {});

// Field sum sum_i c_i * modes_i.
VectorField span_field(const std::vector<VectorField>& modes, const Eigen::VectorXd& c);
ScalarField span_field(const std::vector<ScalarField>& fields, const Eigen::VectorXd& c, BcTag tag);

struct WEigenbasis {
  GridPtr grid;
  double alpha = 0.0;
  std::vector<double> eigenvalues;  // strictly increasing
  Eigen::MatrixXd coeffs;           // Stokes-mode coefficients, M x N
  std::vector<VectorField> fields;
  std::vector<ScalarField> stream;
  Eigen::MatrixXd gram_V;  // V-Gram of the Stokes modes, M x M
  double condition_V = 0.0;
  int size() const { return static_cast<int>(eigenvalues.size()); }
};

WEigenbasis w_basis(const StokesEigenbasis& stokes, int n, double alpha);

// Basis cache: "SGB1", nx, ny, N (u32), alpha (f64), eigenvalues, N snapshots.
void write_basis(std::ostream& os, const StokesEigenbasis& b, double alpha = 0.0);
StokesEigenbasis read_basis(std::istream& is, GridPtr grid = nullptr);
void save_basis(const std::string& path, const StokesEigenbasis& b);
StokesEigenbasis load_basis(const std::string& path, GridPtr grid = nullptr);

// Loads from SGF_CACHE_DIR when a matching cache exists, otherwise solves and stores.
StokesEigenbasis cached_stokes_basis(const GridPtr& grid, int n, std::string* cache_id = nullptr);

}  // namespace sgf
