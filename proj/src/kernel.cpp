#include "intact/kernel.hpp"

#include "alternation.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace intact {

double kernel_value(const KernelSpec& kernel, const Vector& a, const Vector& b) {
  if (kernel.kind == KernelSpec::Kind::Linear) return a.dot(b);
  return std::exp(-kernel.gamma * (a - b).squaredNorm());
}

Matrix gram(const Matrix& view_data, const KernelSpec& kernel) {
  if (!view_data.allFinite()) throw Error(ErrorCode::NonFiniteInput, "gram input contains NaN or Inf");
  if (kernel.kind == KernelSpec::Kind::Rbf && !(kernel.gamma > 0.0))
    throw Error(ErrorCode::InvalidArgument, "rbf gamma must be positive");
  const auto n = view_data.rows();
  Matrix K(n, n);
  if (kernel.kind == KernelSpec::Kind::Linear) {
    K = view_data * view_data.transpose();
  } else {
    const Vector sq = view_data.rowwise().squaredNorm();
    K = view_data * view_data.transpose();
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        // exact zero distance on the diagonal so k(z, z) = 1
        const double dist = i == j ? 0.0 : std::max(0.0, sq(i) + sq(j) - 2.0 * K(i, j));
        K(i, j) = dist;
      }
    K = (-kernel.gamma * K.array()).exp().matrix();
  }
  // mirror the upper triangle so K is symmetric to the last bit
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) K(i, j) = K(j, i);
  return K;
}

Vector cross_kernel(const Matrix& training_view, const Vector& z, const KernelSpec& kernel) {
  if (training_view.cols() != z.size()) throw Error(ErrorCode::ShapeMismatch, "cross-kernel dimension mismatch");
  Vector k(training_view.rows());
  for (Eigen::Index j = 0; j < training_view.rows(); ++j)
    k(j) = kernel_value(kernel, training_view.row(j).transpose(), z);
  return k;
}

double median_heuristic_gamma(const Matrix& view_data) {
  std::vector<double> d2;
  const auto n = view_data.rows();
  d2.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) d2.push_back((view_data.row(i) - view_data.row(j)).squaredNorm());
  if (d2.empty()) return 1.0;
  auto mid = d2.begin() + static_cast<long>(d2.size() / 2);
  std::nth_element(d2.begin(), mid, d2.end());
  return *mid > 0.0 ? 1.0 / *mid : 1.0;
}

KernelSpec resolve_kernel(const Matrix& view_data, KernelSpec kernel) {
  if (kernel.kind == KernelSpec::Kind::Rbf && kernel.gamma == 0.0) kernel.gamma = median_heuristic_gamma(view_data);
  if (kernel.kind == KernelSpec::Kind::Rbf && !(kernel.gamma > 0.0))
    throw Error(ErrorCode::InvalidArgument, "rbf gamma must be positive");
  return kernel;
}

Matrix enforce_psd(Matrix K) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(K, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().size() ? eig.eigenvalues()(0) : 0.0;
  if (min_eig < -1e-4) throw Error(ErrorCode::GramNotPSD, "gram has eigenvalue " + std::to_string(min_eig));
  if (min_eig < -1e-8) K.diagonal().array() += 1e-10 * K.diagonal().mean();
  return K;
}

KernelModel make_kernel_model(std::span<const Matrix> views, const KernelSpec& kernel, int d) {
  KernelModel km;
  for (const auto& z : views) {
    const KernelSpec k = resolve_kernel(z, kernel);
    km.kernels.push_back(k);
    km.grams.push_back(enforce_psd(gram(z, k)));
    km.training_views.push_back(z);
    km.atoms.emplace_back(Matrix::Zero(z.rows(), d));
  }
  return km;
}

namespace {

void check_view_index(std::size_t v, const KernelModel& km) {
  if (v >= km.atoms.size()) throw Error(ErrorCode::IndexOutOfRange, "view index " + std::to_string(v));
}

// Per-view quantities reused across every example in a sweep.
struct ViewCache {
  Matrix KA;  // K A, n x d
  Matrix G;   // A^T K A, d x d
};

ViewCache view_cache(const Matrix& K, const Matrix& A) {
  ViewCache c;
  c.KA = K * A;
  c.G = A.transpose() * c.KA;
  c.G = 0.5 * (c.G + c.G.transpose());
  return c;
}

double clamp_residual(double r) { return r > 0.0 ? r : 0.0; }

double cached_residual(const Matrix& K, const ViewCache& c, Eigen::Index i, const Vector& x) {
  return clamp_residual(K(i, i) - 2.0 * c.KA.row(i).dot(x) + x.dot(c.G * x));
}

Vector atom_residuals(const Matrix& K, const Matrix& A, const Matrix& X) {
  const ViewCache c = view_cache(K, A);
  Vector r(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) r(i) = cached_residual(K, c, i, X.row(i).transpose());
  return r;
}

// Atom analogue of the map update: A = diag(Q) X (X^T Q X + n C1)^{-1}.
Matrix update_atoms_once(const Matrix& K, const Matrix& X, const Matrix& A, const Objective& obj) {
  const Vector r = atom_residuals(K, A, X);
  Vector q(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) q(i) = weight_of_sq(obj.loss, r(i));
  const Matrix qx = q.asDiagonal() * X;
  Matrix lhs = X.transpose() * qx;
  lhs.diagonal().array() += static_cast<double>(X.rows()) * obj.C1;
  return solve_spd(lhs, qx.transpose(), "atom").transpose();
}

int solve_atoms(const Matrix& K, const Matrix& X, Matrix& A, const Objective& obj, int max_inner, double tol_x) {
  int k = 0;
  while (k < max_inner) {
    Matrix next = update_atoms_once(K, X, A, obj);
    const double step = (next - A).norm();
    A = std::move(next);
    ++k;
    if (step <= tol_x) break;
  }
  return k;
}

}  // namespace

double kernel_residual_sq(Eigen::Index i, std::size_t v, const Vector& x, const KernelModel& km) {
  check_view_index(v, km);
  const Matrix& K = km.grams[v];
  const Matrix& A = km.atoms[v];
  if (i < 0 || i >= K.rows()) throw Error(ErrorCode::IndexOutOfRange, "example index " + std::to_string(i));
  if (x.size() != A.cols()) throw Error(ErrorCode::ShapeMismatch, "x length differs from atom width");
  const Vector Ax = A * x;
  return clamp_residual(K(i, i) - 2.0 * K.row(i).dot(Ax) + Ax.dot(K * Ax));
}

double kernel_w_norm_sq(std::size_t v, const KernelModel& km) {
  check_view_index(v, km);
  const Matrix& A = km.atoms[v];
  return (A.array() * (km.grams[v] * A).array()).sum();
}

double kernel_objective_full(const KernelModel& km, const Matrix& X, const Objective& obj) {
  const double m = static_cast<double>(km.atoms.size());
  const double n = static_cast<double>(X.rows());
  double loss = 0.0;
  double w_pen = 0.0;
  for (std::size_t v = 0; v < km.atoms.size(); ++v) {
    const Vector r = atom_residuals(km.grams[v], km.atoms[v], X);
    for (Eigen::Index i = 0; i < r.size(); ++i) loss += loss_of_sq(obj.loss, r(i));
    w_pen += kernel_w_norm_sq(v, km);
  }
  return loss / (m * n) + obj.C1 / m * w_pen + obj.C2 / n * X.squaredNorm();
}

Matrix kernel_pca_init(std::span<const Matrix> grams, int d, std::uint64_t seed) {
  if (grams.empty()) throw Error(ErrorCode::EmptyView, "no grams to initialize from");
  const auto n = grams.front().rows();
  Matrix K = Matrix::Zero(n, n);
  for (const auto& g : grams) K += g;
  // double centring: H K H with H = I - 11^T/n
  const Vector col_mean = K.colwise().mean().transpose();
  const double total_mean = col_mean.mean();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) K(i, j) += total_mean - col_mean(i) - col_mean(j);
  K = 0.5 * (K + K.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(K);
  const Vector& vals = eig.eigenvalues();  // ascending
  const double top = vals.size() ? vals(vals.size() - 1) : 0.0;
  Matrix X = Matrix::Zero(n, d);
  int filled = 0;
  for (Eigen::Index k = vals.size() - 1; k >= 0 && filled < d; --k) {
    // singular values of the centred data are sqrt(eigenvalues)
    if (!(top > 0.0) || !(std::sqrt(std::max(vals(k), 0.0)) > 1e-10 * std::sqrt(top))) break;
    Vector score = eig.eigenvectors().col(k) * std::sqrt(vals(k));
    Eigen::Index arg = 0;
    score.cwiseAbs().maxCoeff(&arg);
    if (score(arg) < 0.0) score = -score;
    X.col(filled++) = score;
  }
  if (filled < d) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (Eigen::Index j = filled; j < d; ++j)
      for (Eigen::Index i = 0; i < n; ++i) X(i, j) = normal(rng) * scale;
  }
  return X;
}

FitResult kernel_fit(const MultiViewDataset& dataset, const Hyperparams& hp, const KernelSpec& kernel,
                     const std::optional<FitInit>& init, const FitOptions& options) {
  hp.validate();
  if (dataset.views.empty() || dataset.n() == 0) throw Error(ErrorCode::EmptyView, "dataset has no examples");
  const Objective obj{options.loss.value_or(EstimatorKind::cauchy(hp.c)), hp.C1, hp.C2};
  const auto n = dataset.n();
  const auto m = dataset.m();

  KernelModel km = make_kernel_model(dataset.views, kernel, hp.d);

  detail::AlternationState state;
  if (init) {
    state.X = init->X;
    state.maps = init->W;
    if (state.X.rows() != n || state.X.cols() != hp.d || state.maps.size() != m)
      throw Error(ErrorCode::ShapeMismatch, "initial state does not match dataset and d");
    for (const auto& a : state.maps)
      if (a.rows() != n || a.cols() != hp.d) throw Error(ErrorCode::ShapeMismatch, "initial atoms must be n x d");
  } else {
    state.X = kernel_pca_init(km.grams, hp.d, hp.seed);
    const Matrix lhs = ridge_system(state.X, hp.C1);
    const Matrix A0 = solve_spd(lhs, state.X.transpose(), "ridge init").transpose();
    state.maps.assign(m, A0);
  }

  const int threads = options.threads;
  auto x_sweep = [&](detail::AlternationState& s) {
    std::vector<ViewCache> caches;
    std::vector<Matrix> grams;
    for (std::size_t v = 0; v < m; ++v) {
      caches.push_back(view_cache(km.grams[v], s.maps[v]));
      grams.push_back(caches.back().G);
    }
    std::vector<int> iters(static_cast<std::size_t>(n), 0);
    detail::parallel_for(n, threads, [&](long i) {
      XProblem p;
      p.gram = grams;
      for (std::size_t v = 0; v < m; ++v) p.rhs.emplace_back(caches[v].KA.row(i).transpose());
      p.residual_sq = [&, i](std::size_t v, const Vector& x) { return cached_residual(km.grams[v], caches[v], i, x); };
      p.objective = obj;
      auto r = p.solve(s.X.row(i).transpose(), hp.max_inner, hp.tol_x);
      s.X.row(i) = r.solution.transpose();
      iters[static_cast<std::size_t>(i)] = r.iterations;
    });
    long total = 0;
    for (int k : iters) total += k;
    return total;
  };
  auto w_sweep = [&](detail::AlternationState& s) {
    std::vector<int> iters(m, 0);
    detail::parallel_for(static_cast<long>(m), threads, [&](long v) {
      const auto vi = static_cast<std::size_t>(v);
      iters[vi] = solve_atoms(km.grams[vi], s.X, s.maps[vi], obj, hp.max_inner, hp.tol_x);
    });
    long total = 0;
    for (int k : iters) total += k;
    return total;
  };
  auto objective = [&](const detail::AlternationState& s) {
    double loss = 0.0;
    double w_pen = 0.0;
    for (std::size_t v = 0; v < m; ++v) {
      const Vector r = atom_residuals(km.grams[v], s.maps[v], s.X);
      for (Eigen::Index i = 0; i < r.size(); ++i) loss += loss_of_sq(obj.loss, r(i));
      w_pen += (s.maps[v].array() * (km.grams[v] * s.maps[v]).array()).sum();
    }
    const double md = static_cast<double>(m);
    const double nd = static_cast<double>(n);
    return loss / (md * nd) + obj.C1 / md * w_pen + obj.C2 / nd * s.X.squaredNorm();
  };

  FitResult result;
  result.history = detail::alternate(state, hp, options.divergence_tol, x_sweep, w_sweep, objective);
  km.atoms = std::move(state.maps);
  result.model.mode = ModelMode::Kernel;
  result.model.kernel_part = std::move(km);
  result.model.hyperparams = hp;
  result.embedding.X = std::move(state.X);
  return result;
}

Vector kernel_embed(std::span<const Vector> z_new, const IntactModel& model, const Hyperparams& hp) {
  if (model.mode != ModelMode::Kernel || !model.kernel_part)
    throw Error(ErrorCode::InvalidArgument, "kernel_embed needs a kernel model");
  const KernelModel& km = *model.kernel_part;
  const auto m = km.atoms.size();
  if (z_new.size() != m) throw Error(ErrorCode::ShapeMismatch, "example view count differs from model");
  for (std::size_t v = 0; v < m; ++v)
    if (z_new[v].size() != km.training_views[v].cols())
      throw Error(ErrorCode::ShapeMismatch, "view " + std::to_string(v) + " dimension differs from training");

  std::vector<Matrix> grams;
  std::vector<double> self;
  XProblem p;
  for (std::size_t v = 0; v < m; ++v) {
    const Matrix& A = km.atoms[v];
    const Vector k = cross_kernel(km.training_views[v], z_new[v], km.kernels[v]);
    Matrix G = A.transpose() * km.grams[v] * A;
    grams.push_back(0.5 * (G + G.transpose()));
    p.rhs.emplace_back(A.transpose() * k);
    self.push_back(kernel_value(km.kernels[v], z_new[v], z_new[v]));
  }
  p.gram = grams;
  p.residual_sq = [&](std::size_t v, const Vector& x) {
    return clamp_residual(self[v] - 2.0 * p.rhs[v].dot(x) + x.dot(grams[v] * x));
  };
  p.objective = Objective::from(hp);
  const Vector x0 = p.start_point(km.atoms.front().cols());
  return p.solve(x0, hp.max_inner, hp.tol_x).solution;
}

}  // namespace intact
