#include "sgf/stokes.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <thread>
#include <tuple>
#include <unistd.h>

#include "sgf/field_io.hpp"

namespace sgf {

InteriorIndex::InteriorIndex(const Grid& g) : unknown_of(g.size(), -1) {
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      unknown_of[g.idx(i, j)] = n++;
      node_of.push_back(g.idx(i, j));
    }
}

Eigen::VectorXd InteriorIndex::gather(const ScalarField& f) const {
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) v[k] = f.values[node_of[k]];
  return v;
}

ScalarField InteriorIndex::scatter(const GridPtr& g, const Eigen::VectorXd& v, BcTag tag) const {
  ScalarField f(g, tag);
  for (int k = 0; k < n; ++k) f.values[node_of[k]] = v[k];
  return f;
}

namespace {

using Trip = Eigen::Triplet<double>;

// One-sided/central first difference as a full-node sparse matrix.
SpMat diff_matrix(const Grid& g, bool along_x) {
  std::vector<Trip> t;
  const int n = along_x ? g.nx : g.ny;
  const double c = 0.5 / (along_x ? g.hx : g.hy);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int row = g.idx(i, j);
      const int p = along_x ? i : j;
      auto col = [&](int q) { return along_x ? g.idx(q, j) : g.idx(i, q); };
      if (p > 0 && p < n - 1) {
        t.emplace_back(row, col(p + 1), c);
        t.emplace_back(row, col(p - 1), -c);
      } else if (p == 0) {
        t.emplace_back(row, col(0), -3.0 * c);
        t.emplace_back(row, col(1), 4.0 * c);
        t.emplace_back(row, col(2), -c);
      } else {
        t.emplace_back(row, col(n - 1), 3.0 * c);
        t.emplace_back(row, col(n - 2), -4.0 * c);
        t.emplace_back(row, col(n - 3), c);
      }
    }
  SpMat m(g.size(), g.size());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

StreamOperators::StreamOperators(GridPtr g) : grid(std::move(g)), index(*grid) {
  const Grid& G = *grid;
  const int n = index.count();
  const double ix = 1.0 / (G.hx * G.hx), iy = 1.0 / (G.hy * G.hy);
  std::vector<Trip> t;
  auto add = [&](int row, int i, int j, double v) {
    const int u = index.unknown_of[G.idx(i, j)];
    if (u >= 0) t.emplace_back(row, u, v);
  };
  for (int j = 0; j < G.ny; ++j)
    for (int i = 0; i < G.nx; ++i) {
      const int row = G.idx(i, j);
      if (!G.on_boundary(i, j)) {
        add(row, i, j, -2.0 * ix - 2.0 * iy);
        add(row, i - 1, j, ix);
        add(row, i + 1, j, ix);
        add(row, i, j - 1, iy);
        add(row, i, j + 1, iy);
        continue;
      }
      // Ghost reflection in the wall-normal direction; tangential neighbours lie on the wall.
      if (i == 0) add(row, 1, j, 2.0 * ix);
      if (i == G.nx - 1) add(row, G.nx - 2, j, 2.0 * ix);
      if (j == 0) add(row, i, 1, 2.0 * iy);
      if (j == G.ny - 1) add(row, i, G.ny - 2, 2.0 * iy);
    }
  lap_clamped.resize(G.size(), n);
  lap_clamped.setFromTriplets(t.begin(), t.end());

  SpMat w(G.size(), G.size());
  {
    std::vector<Trip> d;
    for (int k = 0; k < G.size(); ++k) d.emplace_back(k, k, G.weights[k]);
    w.setFromTriplets(d.begin(), d.end());
  }
  bending = SpMat(lap_clamped.transpose() * w * lap_clamped);

  SpMat sel(G.size(), n);
  {
    std::vector<Trip> d;
    for (int k = 0; k < n; ++k) d.emplace_back(index.node_of[k], k, 1.0);
    sel.setFromTriplets(d.begin(), d.end());
  }
  SpMat lap_int = SpMat(sel.transpose() * lap_clamped);
  stiffness = SpMat(-G.hx * G.hy * lap_int);

  const SpMat Dx = diff_matrix(G, true), Dy = diff_matrix(G, false);
  const SpMat full = SpMat(Dx * Dx) + SpMat(Dy * Dy);
  matched = SpMat(sel.transpose() * full * sel);
}

namespace {

std::mutex g_cache_mutex;

struct SpdSolver {
  Eigen::SimplicialLDLT<SpMat> ldlt;
  SpMat a;
};

// Normwise backward error |b - A x| / (|A| |x| + |b|) in the infinity norm.
double backward_error(const SpMat& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b, const Eigen::VectorXd& r) {
  double an = 0.0;
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(a.rows());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) rows[it.row()] += std::abs(it.value());
  an = rows.maxCoeff();
  const double den = an * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
  return den > 0.0 ? r.lpNorm<Eigen::Infinity>() / den : 0.0;
}

struct LuSolver {
  Eigen::SparseLU<SpMat> lu;
};

using Key = std::tuple<int, int, std::uint64_t>;

std::uint64_t bits(double x) {
  std::uint64_t b;
  std::memcpy(&b, &x, sizeof b);
  return b;
}

}  // namespace

std::shared_ptr<const StreamOperators> stream_operators(const GridPtr& g) {
  static std::map<std::tuple<int, int>, std::shared_ptr<const StreamOperators>> cache;
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto key = std::make_tuple(g->nx, g->ny);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto ops = std::make_shared<const StreamOperators>(g);
  cache.emplace(key, ops);
  return ops;
}

namespace {

std::shared_ptr<const SpdSolver> elliptic_factor(const GridPtr& g, double alpha) {
  static std::map<Key, std::shared_ptr<const SpdSolver>> cache;
  auto ops = stream_operators(g);
  const Key key{g->nx, g->ny, bits(alpha)};
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto s = std::make_shared<SpdSolver>();
  s->a = alpha > 0.0 ? SpMat(ops->stiffness + alpha * alpha * ops->bending) : ops->stiffness;
  s->ldlt.compute(s->a);
  if (s->ldlt.info() != Eigen::Success) throw std::runtime_error("elliptic factorisation failed");
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  cache.emplace(key, s);
  return s;
}

std::shared_ptr<const LuSolver> matched_factor(const GridPtr& g) {
  static std::map<std::tuple<int, int>, std::shared_ptr<const LuSolver>> cache;
  auto ops = stream_operators(g);
  const auto key = std::make_tuple(g->nx, g->ny);
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto s = std::make_shared<LuSolver>();
  s->lu.analyzePattern(ops->matched);
  s->lu.factorize(ops->matched);
  if (s->lu.info() != Eigen::Success) throw std::runtime_error("projection matrix is singular");
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  cache.emplace(key, s);
  return s;
}

}  // namespace

EllipticResult elliptic_solve(const ScalarField& q, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("alpha must be nonnegative");
  const GridPtr& g = q.grid;
  auto ops = stream_operators(g);
  auto solver = elliptic_factor(g, alpha);
  Eigen::VectorXd rhs = -(g->hx * g->hy) * ops->index.gather(q);
  Eigen::VectorXd phi = solver->ldlt.solve(rhs);
  const double rn = rhs.norm();
  double res = 0.0;
  // The biharmonic part is badly conditioned at large alpha; a few refinement sweeps fix that.
  for (int sweep = 0; rn > 0.0; ++sweep) {
    const Eigen::VectorXd r = rhs - solver->a * phi;
    res = backward_error(solver->a, phi, rhs, r);
    if (res <= kTolSolve || sweep == 3) break;
    phi += solver->ldlt.solve(r);
  }
  if (!(res <= kTolSolve)) {
    char msg[64];
    std::snprintf(msg, sizeof msg, "elliptic solve residual %.3e", res);
    throw std::runtime_error(msg);
  }
  EllipticResult out;
  out.phi = ops->index.scatter(g, phi, alpha > 0.0 ? BcTag::clamped : BcTag::dirichlet);
  out.u = perp_grad(out.phi);
  out.residual = res;
  return out;
}

VectorField elliptic_K(const ScalarField& q, double alpha) { return elliptic_solve(q, alpha).u; }

ScalarField poisson_dirichlet(const ScalarField& rhs) { return elliptic_solve(rhs, 0.0).phi; }

ScalarField matched_poisson(const ScalarField& rhs) {
  auto ops = stream_operators(rhs.grid);
  auto solver = matched_factor(rhs.grid);
  const Eigen::VectorXd b = ops->index.gather(rhs);
  Eigen::VectorXd psi = solver->lu.solve(b);
  const double bn = b.norm();
  double res = 0.0;
  for (int sweep = 0; bn > 0.0; ++sweep) {
    const Eigen::VectorXd r = b - ops->matched * psi;
    res = backward_error(ops->matched, psi, b, r);
    if (res <= kTolSolve || sweep == 3) break;
    psi += solver->lu.solve(r);
  }
  if (!(res <= kTolSolve)) throw std::runtime_error("projection solve residual " + std::to_string(res));
  return ops->index.scatter(rhs.grid, psi, BcTag::dirichlet);
}

VectorField leray_project(const VectorField& f) { return perp_grad(matched_poisson(curl2d(f))); }

VectorField resolvent_solve(const VectorField& f, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("resolvent requires alpha > 0");
  return elliptic_K(curl2d(f), alpha);
}

ScalarField curl_v(const VectorField& u, double alpha) {
  ScalarField q = curl2d(u);
  if (alpha != 0.0) q.values -= alpha * alpha * curl2d(laplacian(u)).values;
  return q;
}

double norm_H(const VectorField& u) { return l2_norm(u); }

double inner_V(const VectorField& u, const VectorField& w, double alpha) {
  return l2_inner(u, w) + alpha * alpha * grad_inner(u, w);
}

double inner_W(const VectorField& u, const VectorField& w, double alpha) {
  return inner_V(u, w, alpha) + l2_inner(curl_v(u, alpha), curl_v(w, alpha));
}

double norm_V(const VectorField& u, double alpha) { return std::sqrt(std::max(0.0, inner_V(u, u, alpha))); }
double norm_star(const VectorField& u, double alpha) { return l2_norm(curl_v(u, alpha)); }
double norm_W(const VectorField& u, double alpha) { return std::sqrt(std::max(0.0, inner_W(u, u, alpha))); }

double norm_H3s(const VectorField& u) {
  const double a = l2_inner(u, u) + grad_inner(u, u);
  const double b = l2_inner(curl_v(u, 1.0), curl_v(u, 1.0));
  return std::sqrt(std::max(0.0, a + b));
}

VectorField span_field(const std::vector<VectorField>& modes, const Eigen::VectorXd& c) {
  if (modes.empty()) throw std::invalid_argument("empty basis");
  VectorField u(modes[0].grid(), modes[0].x.tag);
  u.y.tag = modes[0].y.tag;
  for (int i = 0; i < c.size(); ++i)
    if (c[i] != 0.0) axpy(c[i], modes[i], u);
  return u;
}

ScalarField span_field(const std::vector<ScalarField>& fields, const Eigen::VectorXd& c, BcTag tag) {
  if (fields.empty()) throw std::invalid_argument("empty basis");
  ScalarField s(fields[0].grid, tag);
  for (int i = 0; i < c.size(); ++i) s.values += c[i] * fields[i].values;
  return s;
}

namespace {

// Columns: per-mode component values scaled by sqrt(weights), so Gram = F^T F.
Eigen::MatrixXd weighted_columns(const std::vector<ScalarField>& fs) {
  const int n = fs.empty() ? 0 : fs[0].grid->size();
  Eigen::MatrixXd m(n, fs.size());
  for (size_t k = 0; k < fs.size(); ++k)
    m.col(k) = fs[k].values.cwiseProduct(fs[k].grid->weights.cwiseSqrt());
  return m;
}

Eigen::MatrixXd vector_gram(const std::vector<VectorField>& a) {
  std::vector<ScalarField> xs, ys;
  for (const auto& f : a) {
    xs.push_back(f.x);
    ys.push_back(f.y);
  }
  const Eigen::MatrixXd X = weighted_columns(xs), Y = weighted_columns(ys);
  return X.transpose() * X + Y.transpose() * Y;
}

Eigen::MatrixXd grad_gram(const std::vector<VectorField>& a) {
  std::vector<VectorField> gx, gy;
  for (const auto& f : a) {
    gx.push_back(grad(f.x));
    gy.push_back(grad(f.y));
  }
  return vector_gram(gx) + vector_gram(gy);
}

Eigen::MatrixXd scalar_gram(const std::vector<ScalarField>& a) {
  const Eigen::MatrixXd X = weighted_columns(a);
  return X.transpose() * X;
}

Eigen::MatrixXd sym(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

std::vector<int> cluster_flags(const std::vector<double>& ev) {
  std::vector<int> f(ev.size(), 0);
  for (size_t i = 1; i < ev.size(); ++i)
    if (std::abs(ev[i] - ev[i - 1]) <= 1e-6 * std::abs(ev[i])) f[i] = f[i - 1] = 1;
  return f;
}

}  // namespace

StokesEigenbasis stokes_eigensolve(const GridPtr& grid, int n, const EigenOptions& opts) {
  if (n < 1) throw std::invalid_argument("need at least one eigenpair");
  auto ops = stream_operators(grid);
  const int dim = ops->index.count();
  if (n > dim) throw std::invalid_argument("more eigenpairs requested than unknowns");
  const int p = std::min(dim, n + std::max(8, n / 2));

  Eigen::SimplicialLDLT<SpMat> ldlt(ops->bending);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("bending factorisation failed");

  std::mt19937_64 rng(opts.seed);
  Eigen::MatrixXd X(dim, p);
  for (int c = 0; c < p; ++c)
    for (int r = 0; r < dim; ++r) X(r, c) = double(rng() >> 11) * 0x1.0p-53 - 0.5;

  Eigen::VectorXd mu;
  int it = 0;
  bool converged = false;
  for (; it < opts.max_iterations && !converged; ++it) {
    Eigen::MatrixXd Y = ldlt.solve(ops->stiffness * X);
    const Eigen::MatrixXd By = ops->bending * Y, Sy = ops->stiffness * Y;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(sym(Y.transpose() * By),
                                                                  sym(Y.transpose() * Sy));
    if (ges.info() != Eigen::Success) throw std::runtime_error("Rayleigh-Ritz step failed");
    mu = ges.eigenvalues();
    X = Y * ges.eigenvectors();
    const Eigen::MatrixXd BX = By * ges.eigenvectors(), SX = Sy * ges.eigenvectors();
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      worst = std::max(worst, (BX.col(i) - mu[i] * SX.col(i)).norm() / (mu[i] * SX.col(i).norm()));
    converged = worst <= opts.tol;
  }
  if (!converged) throw std::runtime_error("Stokes eigensolver did not converge");

  StokesEigenbasis b;
  b.grid = grid;
  b.iterations = it;
  std::vector<ScalarField> psi;
  std::vector<VectorField> modes;
  for (int i = 0; i < n; ++i) {
    b.pencil_eigenvalues.push_back(mu[i]);
    psi.push_back(ops->index.scatter(grid, X.col(i), BcTag::clamped));
    modes.push_back(perp_grad(psi.back()));
  }
  // Rayleigh-Ritz in the velocity forms used by every downstream pairing.
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> rr(sym(grad_gram(modes)),
                                                               sym(vector_gram(modes)));
  if (rr.info() != Eigen::Success) throw std::runtime_error("velocity Ritz step failed");
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd c = rr.eigenvectors().col(i);
    // Fix the sign so the largest coefficient is positive.
    Eigen::Index imax;
    c.cwiseAbs().maxCoeff(&imax);
    if (c[imax] < 0) c = -c;
    b.eigenvalues.push_back(rr.eigenvalues()[i]);
    b.stream.push_back(span_field(psi, c, BcTag::clamped));
    b.modes.push_back(perp_grad(b.stream.back()));
  }
  b.clustered = cluster_flags(b.eigenvalues);
  return b;
}

WEigenbasis w_basis(const StokesEigenbasis& stokes, int n, double alpha) {
  const int m = stokes.size();
  if (n < 1 || n > m - 4)
    throw std::invalid_argument("W-basis needs N <= M - 4 (N=" + std::to_string(n) +
                                ", M=" + std::to_string(m) + ")");
  std::vector<ScalarField> curls;
  for (const auto& e : stokes.modes) curls.push_back(curl_v(e, alpha));
  const Eigen::MatrixXd KV = sym(vector_gram(stokes.modes) + alpha * alpha * grad_gram(stokes.modes));
  const Eigen::MatrixXd KW = KV + sym(scalar_gram(curls));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> kv(KV);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(KW, KV);
  if (ges.info() != Eigen::Success) throw std::runtime_error("W-basis eigenproblem failed");

  WEigenbasis w;
  w.grid = stokes.grid;
  w.alpha = alpha;
  w.condition_V = kv.eigenvalues().maxCoeff() / kv.eigenvalues().minCoeff();
  w.gram_V = KV;
  w.coeffs.resize(m, n);
  for (int i = 0; i < n; ++i) {
    const double lam = ges.eigenvalues()[i];
    Eigen::VectorXd c = ges.eigenvectors().col(i) / std::sqrt(lam);
    Eigen::Index imax;
    c.cwiseAbs().maxCoeff(&imax);
    if (c[imax] < 0) c = -c;
    w.eigenvalues.push_back(lam);
    w.coeffs.col(i) = c;
    w.stream.push_back(span_field(stokes.stream, c, BcTag::clamped));
    w.fields.push_back(perp_grad(w.stream.back()));
  }
  return w;
}

void write_basis(std::ostream& os, const StokesEigenbasis& b, double alpha) {
  os.write("SGB1", 4);
  put_u32(os, static_cast<std::uint32_t>(b.grid->nx));
  put_u32(os, static_cast<std::uint32_t>(b.grid->ny));
  put_u32(os, static_cast<std::uint32_t>(b.size()));
  put_f64(os, alpha);
  for (double v : b.eigenvalues) put_f64(os, v);
  for (const auto& s : b.stream) write_snapshot(os, s);
}

StokesEigenbasis read_basis(std::istream& is, GridPtr grid) {
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "SGB1") throw std::runtime_error("not an SGB1 cache");
  const int nx = static_cast<int>(get_u32(is)), ny = static_cast<int>(get_u32(is));
  const int n = static_cast<int>(get_u32(is));
  (void)get_f64(is);
  if (!grid) grid = make_grid(nx, ny);
  if (grid->nx != nx || grid->ny != ny) throw std::runtime_error("basis cache grid mismatch");
  StokesEigenbasis b;
  b.grid = grid;
  for (int i = 0; i < n; ++i) b.eigenvalues.push_back(get_f64(is));
  for (int i = 0; i < n; ++i) {
    b.stream.push_back(read_snapshot(is, grid));
    b.modes.push_back(perp_grad(b.stream.back()));
  }
  b.clustered = cluster_flags(b.eigenvalues);
  return b;
}

void save_basis(const std::string& path, const StokesEigenbasis& b) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_basis(os, b);
}

StokesEigenbasis load_basis(const std::string& path, GridPtr grid) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return read_basis(is, std::move(grid));
}

StokesEigenbasis cached_stokes_basis(const GridPtr& grid, int n, std::string* cache_id) {
  const std::string name =
      "stokes_" + std::to_string(grid->nx) + "x" + std::to_string(grid->ny) + "_N" + std::to_string(n) + ".sgb";
  if (cache_id) *cache_id = name;
  const char* dir = std::getenv("SGF_CACHE_DIR");
  if (dir && *dir) {
    const std::filesystem::path p = std::filesystem::path(dir) / name;
    if (std::filesystem::exists(p)) return load_basis(p.string(), grid);
    StokesEigenbasis b = stokes_eigensolve(grid, n);
    std::filesystem::create_directories(dir);
    // Write then rename, so a concurrent reader never sees a partial file.
    const std::filesystem::path tmp =
        p.string() + ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) +
        std::to_string(::getpid());
    save_basis(tmp.string(), b);
    std::filesystem::rename(tmp, p);
    return b;
  }
  return stokes_eigensolve(grid, n);
}

}  // namespace sgf
