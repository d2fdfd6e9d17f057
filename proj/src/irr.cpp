#include "intact/irr.hpp"

#include "alternation.hpp"
#include "parallel.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace intact {

namespace {

void require_linear(const IntactModel& model) {
  if (model.mode != ModelMode::Linear) throw Error(ErrorCode::InvalidArgument, "operation needs a linear model");
}

void check_example(std::span<const Vector> z, std::span<const Matrix> W, const Vector& x) {
  if (z.size() != W.size()) throw Error(ErrorCode::ShapeMismatch, "example view count differs from model");
  for (std::size_t v = 0; v < z.size(); ++v) {
    if (W[v].rows() != z[v].size() || W[v].cols() != x.size()) {
      std::ostringstream os;
      os << "view " << v << ": W is " << W[v].rows() << "x" << W[v].cols() << ", z has " << z[v].size()
         << " entries, x has " << x.size();
      throw Error(ErrorCode::ShapeMismatch, os.str());
    }
  }
}

void check_view(const Matrix& view_data, const Matrix& X, const Matrix& W) {
  if (view_data.rows() != X.rows() || W.rows() != view_data.cols() || W.cols() != X.cols())
    throw Error(ErrorCode::ShapeMismatch, "view, embedding and map shapes disagree");
}

// Squared residual norms ||z_i - W x_i||^2 for every row.
Vector row_residuals_sq(const Matrix& view_data, const Matrix& X, const Matrix& W) {
  return (view_data - X * W.transpose()).rowwise().squaredNorm();
}

}  // namespace

Matrix solve_spd(const Matrix& a, const Matrix& b, const char* what) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14))
    throw Error(ErrorCode::SingularSystem, std::string(what) + " system is singular");
  return llt.solve(b);
}

// ---- XProblem ---------------------------------------------------------------

Vector XProblem::residuals_sq(const Vector& x) const {
  Vector r(static_cast<Eigen::Index>(m()));
  for (std::size_t v = 0; v < m(); ++v) r(static_cast<Eigen::Index>(v)) = residual_sq(v, x);
  return r;
}

double XProblem::value(const Vector& x) const {
  double sum = 0.0;
  for (std::size_t v = 0; v < m(); ++v) sum += loss_of_sq(objective.loss, residual_sq(v, x));
  return sum / static_cast<double>(m()) + objective.C2 * x.squaredNorm();
}

Vector XProblem::weights(const Vector& x) const {
  Vector q(static_cast<Eigen::Index>(m()));
  for (std::size_t v = 0; v < m(); ++v) q(static_cast<Eigen::Index>(v)) = weight_of_sq(objective.loss, residual_sq(v, x));
  return q;
}

Vector XProblem::update(const Vector& x) const {
  const auto d = x.size();
  const Vector q = weights(x);
  Matrix lhs = Matrix::Identity(d, d) * (static_cast<double>(m()) * objective.C2);
  Vector rhs_sum = Vector::Zero(d);
  for (std::size_t v = 0; v < m(); ++v) {
    lhs.noalias() += q(static_cast<Eigen::Index>(v)) * gram[v];
    rhs_sum.noalias() += q(static_cast<Eigen::Index>(v)) * rhs[v];
  }
  return solve_spd(lhs, rhs_sum, "latent-point");
}

Vector XProblem::start_point(Eigen::Index d) const {
  const double w0 = weight_of_sq(objective.loss, 0.0);
  Matrix lhs = Matrix::Identity(d, d) * (static_cast<double>(m()) * objective.C2);
  Vector rhs_sum = Vector::Zero(d);
  for (std::size_t v = 0; v < m(); ++v) {
    lhs.noalias() += w0 * gram[v];
    rhs_sum.noalias() += w0 * rhs[v];
  }
  try {
    return solve_spd(lhs, rhs_sum, "start");
  } catch (const Error&) {
    return Vector::Zero(d);
  }
}

SubproblemResult<Vector> XProblem::solve(const Vector& x0, int max_inner, double tol_x) const {
  SubproblemResult<Vector> out;
  Vector x = x0;
  out.objective_before = value(x);
  out.objective_trace.push_back(out.objective_before);
  for (int k = 1; k <= max_inner; ++k) {
    Vector next = update(x);
    const double step = (next - x).norm();
    x = std::move(next);
    out.objective_trace.push_back(value(x));
    out.iterations = k;
    if (step <= tol_x) break;
  }
  out.objective_after = out.objective_trace.back();
  out.final_residuals = residuals_sq(x);
  out.solution = std::move(x);
  return out;
}

// ---- objectives ---------------------------------------------------------------

double objective_full(std::span<const Matrix> views, std::span<const Matrix> W, const Matrix& X,
                      const Objective& obj) {
  if (views.size() != W.size() || views.empty()) throw Error(ErrorCode::ShapeMismatch, "view count differs from map count");
  const double m = static_cast<double>(views.size());
  const double n = static_cast<double>(X.rows());
  double loss = 0.0;
  double w_pen = 0.0;
  for (std::size_t v = 0; v < views.size(); ++v) {
    check_view(views[v], X, W[v]);
    const Vector r = row_residuals_sq(views[v], X, W[v]);
    for (Eigen::Index i = 0; i < r.size(); ++i) loss += loss_of_sq(obj.loss, r(i));
    w_pen += W[v].squaredNorm();
  }
  return loss / (m * n) + obj.C1 / m * w_pen + obj.C2 / n * X.squaredNorm();
}

double objective_full(const MultiViewDataset& dataset, const IntactModel& model, const IntactEmbedding& X) {
  require_linear(model);
  if (X.X.rows() != dataset.n()) throw Error(ErrorCode::ShapeMismatch, "embedding rows differ from dataset n");
  return objective_full(dataset.views, model.W, X.X, Objective::from(model.hyperparams));
}

double objective_x(std::span<const Vector> z, std::span<const Matrix> W, const Vector& x, const Objective& obj) {
  check_example(z, W, x);
  double sum = 0.0;
  for (std::size_t v = 0; v < z.size(); ++v) sum += loss_of_sq(obj.loss, (z[v] - W[v] * x).squaredNorm());
  return sum / static_cast<double>(z.size()) + obj.C2 * x.squaredNorm();
}

double objective_x(std::span<const Vector> z, const IntactModel& model, const Vector& x) {
  require_linear(model);
  return objective_x(z, model.W, x, Objective::from(model.hyperparams));
}

double objective_w(const Matrix& view_data, const Matrix& X, const Matrix& W, const Objective& obj) {
  check_view(view_data, X, W);
  const Vector r = row_residuals_sq(view_data, X, W);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) sum += loss_of_sq(obj.loss, r(i));
  return sum / static_cast<double>(X.rows()) + obj.C1 * W.squaredNorm();
}

Vector grad_x(std::span<const Vector> z, std::span<const Matrix> W, const Vector& x, const Objective& obj) {
  check_example(z, W, x);
  Vector g = 2.0 * obj.C2 * x;
  const double inv_m = 1.0 / static_cast<double>(z.size());
  for (std::size_t v = 0; v < z.size(); ++v) {
    const Vector r = z[v] - W[v] * x;
    // d/dx rho(||r||^2) = rho'(u) * (-2 W^T r)
    g.noalias() -= inv_m * 2.0 * weight_of_sq(obj.loss, r.squaredNorm()) * (W[v].transpose() * r);
  }
  return g;
}

Vector grad_x(std::span<const Vector> z, const IntactModel& model, const Vector& x) {
  require_linear(model);
  return grad_x(z, model.W, x, Objective::from(model.hyperparams));
}

// ---- latent-point subproblem ----------------------------------------------------

std::vector<Matrix> view_grams(std::span<const Matrix> W) {
  std::vector<Matrix> g;
  g.reserve(W.size());
  for (const auto& w : W) g.emplace_back(w.transpose() * w);
  return g;
}

XProblem make_x_problem(std::span<const Vector> z, std::span<const Matrix> W, std::span<const Matrix> grams,
                        const Objective& obj) {
  XProblem p;
  p.gram = grams;
  p.rhs.reserve(z.size());
  for (std::size_t v = 0; v < z.size(); ++v) p.rhs.emplace_back(W[v].transpose() * z[v]);
  p.residual_sq = [z, W](std::size_t v, const Vector& x) { return (z[v] - W[v] * x).squaredNorm(); };
  p.objective = obj;
  return p;
}

Vector update_x_once(std::span<const Vector> z, std::span<const Matrix> W, const Vector& x_current,
                     const Objective& obj) {
  check_example(z, W, x_current);
  const auto grams = view_grams(W);
  return make_x_problem(z, W, grams, obj).update(x_current);
}

Vector update_x_once(std::span<const Vector> z, const IntactModel& model, const Vector& x_current) {
  require_linear(model);
  return update_x_once(z, model.W, x_current, Objective::from(model.hyperparams));
}

SubproblemResult<Vector> solve_x(std::span<const Vector> z, std::span<const Matrix> W, const Vector& x0,
                                 const Objective& obj, int max_inner, double tol_x) {
  check_example(z, W, x0);
  const auto grams = view_grams(W);
  return make_x_problem(z, W, grams, obj).solve(x0, max_inner, tol_x);
}

SubproblemResult<Vector> solve_x(std::span<const Vector> z, const IntactModel& model, const Vector& x0,
                                 const Hyperparams& hp) {
  require_linear(model);
  return solve_x(z, model.W, x0, Objective::from(hp), hp.max_inner, hp.tol_x);
}

// ---- generation-map subproblem ---------------------------------------------------

Matrix update_w_once(const Matrix& view_data, const Matrix& X, const Matrix& w_current, const Objective& obj) {
  check_view(view_data, X, w_current);
  const Vector r = row_residuals_sq(view_data, X, w_current);
  Vector q(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) q(i) = weight_of_sq(obj.loss, r(i));
  // (sum_i Q_i x_i x_i^T + n C1) W^T = (sum_i z_i Q_i x_i^T)^T
  const Matrix qx = q.asDiagonal() * X;
  Matrix lhs = X.transpose() * qx;
  lhs.diagonal().array() += static_cast<double>(X.rows()) * obj.C1;
  const Matrix rhs = qx.transpose() * view_data;  // d x D
  return solve_spd(lhs, rhs, "generation-map").transpose();
}

Matrix update_w_once(const Matrix& view_data, const IntactEmbedding& X, const Matrix& w_current,
                     const Hyperparams& hp) {
  return update_w_once(view_data, X.X, w_current, Objective::from(hp));
}

SubproblemResult<Matrix> solve_w(const Matrix& view_data, const Matrix& X, const Matrix& w0, const Objective& obj,
                                 int max_inner, double tol_x) {
  check_view(view_data, X, w0);
  SubproblemResult<Matrix> out;
  Matrix W = w0;
  out.objective_before = objective_w(view_data, X, W, obj);
  out.objective_trace.push_back(out.objective_before);
  for (int k = 1; k <= max_inner; ++k) {
    Matrix next = update_w_once(view_data, X, W, obj);
    const double step = (next - W).norm();
    W = std::move(next);
    out.objective_trace.push_back(objective_w(view_data, X, W, obj));
    out.iterations = k;
    if (step <= tol_x) break;
  }
  out.objective_after = out.objective_trace.back();
  out.final_residuals = row_residuals_sq(view_data, X, W);
  out.solution = std::move(W);
  return out;
}

SubproblemResult<Matrix> solve_w(const Matrix& view_data, const IntactEmbedding& X, const Matrix& w0,
                                 const Hyperparams& hp) {
  return solve_w(view_data, X.X, w0, Objective::from(hp), hp.max_inner, hp.tol_x);
}

// ---- majorant ---------------------------------------------------------------------

Matrix majorant_curvature(std::span<const Vector> z, std::span<const Matrix> W, const Vector& x_k,
                          const Objective& obj) {
  check_example(z, W, x_k);
  const auto d = x_k.size();
  Matrix c = Matrix::Identity(d, d) * obj.C2;
  const double inv_m = 1.0 / static_cast<double>(z.size());
  for (std::size_t v = 0; v < z.size(); ++v) {
    const double q = weight_of_sq(obj.loss, (z[v] - W[v] * x_k).squaredNorm());
    c.noalias() += inv_m * q * (W[v].transpose() * W[v]);
  }
  return c;
}

double majorant_value(const Vector& x, const Vector& x_k, std::span<const Vector> z, std::span<const Matrix> W,
                      const Objective& obj) {
  if (x.size() != x_k.size()) throw Error(ErrorCode::ShapeMismatch, "x and x_k differ in length");
  const Vector dx = x - x_k;
  const Matrix c = majorant_curvature(z, W, x_k, obj);
  return objective_x(z, W, x_k, obj) + dx.dot(grad_x(z, W, x_k, obj)) + dx.dot(c * dx);
}

double majorant_value(const Vector& x, const Vector& x_k, std::span<const Vector> z, const IntactModel& model,
                      const Hyperparams& hp) {
  require_linear(model);
  return majorant_value(x, x_k, z, model.W, Objective::from(hp));
}

Vector majorant_minimizer(const Vector& x_k, std::span<const Vector> z, std::span<const Matrix> W,
                          const Objective& obj) {
  const Matrix c = majorant_curvature(z, W, x_k, obj);
  const Vector g = grad_x(z, W, x_k, obj);
  return x_k - 0.5 * solve_spd(c, g, "majorant");
}

// ---- initialization ------------------------------------------------------------------

Matrix pca_init(std::span<const Matrix> views, int d, std::uint64_t seed) {
  if (views.empty()) throw Error(ErrorCode::EmptyView, "no views to initialize from");
  const auto n = views.front().rows();
  Eigen::Index total = 0;
  for (const auto& v : views) total += v.cols();
  Matrix concat(n, total);
  Eigen::Index col = 0;
  for (const auto& v : views) {
    concat.middleCols(col, v.cols()) = v;
    col += v.cols();
  }
  concat.rowwise() -= concat.colwise().mean();

  Matrix X = Matrix::Zero(n, d);
  Eigen::BDCSVD<Matrix> svd(concat, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  const double s_max = s.size() > 0 ? s(0) : 0.0;
  int filled = 0;
  for (Eigen::Index k = 0; k < s.size() && filled < d; ++k) {
    if (!(s(k) > 1e-10 * s_max) || s_max == 0.0) break;
    Vector score = svd.matrixU().col(k) * s(k);
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

Matrix ridge_system(const Matrix& X, double C1) {
  Matrix lhs = X.transpose() * X;
  lhs.diagonal().array() += static_cast<double>(X.rows()) * C1;
  Eigen::LLT<Matrix> llt(lhs);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14))
    lhs.diagonal().array() += 1e-12 * std::max(1.0, lhs.trace() / static_cast<double>(lhs.rows()));
  return lhs;
}

std::vector<Matrix> ridge_init(std::span<const Matrix> views, const Matrix& X, double C1) {
  const Matrix lhs = ridge_system(X, C1);
  std::vector<Matrix> W;
  W.reserve(views.size());
  for (const auto& z : views) W.emplace_back(solve_spd(lhs, X.transpose() * z, "ridge init").transpose());
  return W;
}

// ---- fit ------------------------------------------------------------------------------

std::vector<Matrix> candidate_starts(std::span<const Matrix> views, int d, std::uint64_t seed, bool leave_one_out) {
  std::vector<Matrix> out{pca_init(views, d, seed)};
  if (!leave_one_out || views.size() < 3) return out;
  for (std::size_t skip = 0; skip < views.size(); ++skip) {
    std::vector<Matrix> rest;
    for (std::size_t v = 0; v < views.size(); ++v)
      if (v != skip) rest.push_back(views[v]);
    out.push_back(pca_init(rest, d, seed));
  }
  return out;
}

FitResult fit(const MultiViewDataset& dataset, const Hyperparams& hp, const std::optional<FitInit>& init,
              const FitOptions& options) {
  hp.validate();
  if (dataset.views.empty() || dataset.n() == 0) throw Error(ErrorCode::EmptyView, "dataset has no examples");
  const Objective obj{options.loss.value_or(EstimatorKind::cauchy(hp.c)), hp.C1, hp.C2};
  const auto n = dataset.n();
  const auto m = dataset.m();

  std::vector<detail::AlternationState> starts;
  if (init) {
    detail::AlternationState state{init->X, init->W};
    if (state.X.rows() != n || state.X.cols() != hp.d || state.maps.size() != m)
      throw Error(ErrorCode::ShapeMismatch, "initial state does not match dataset and d");
    for (std::size_t v = 0; v < m; ++v)
      if (state.maps[v].rows() != dataset.views[v].cols() || state.maps[v].cols() != hp.d)
        throw Error(ErrorCode::ShapeMismatch, "initial W_" + std::to_string(v) + " has the wrong shape");
    starts.push_back(std::move(state));
  } else {
    for (const auto& X0 : candidate_starts(dataset.views, hp.d, hp.seed, options.multi_start))
      starts.push_back({X0, ridge_init(dataset.views, X0, hp.C1)});
  }

  const int threads = options.threads;
  auto x_sweep = [&](detail::AlternationState& s) {
    const auto grams = view_grams(s.maps);
    std::vector<int> iters(static_cast<std::size_t>(n), 0);
    detail::parallel_for(n, threads, [&](long i) {
      const auto z = dataset.example(i);
      const XProblem p = make_x_problem(z, s.maps, grams, obj);
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
      auto r = solve_w(dataset.views[static_cast<std::size_t>(v)], s.X, s.maps[static_cast<std::size_t>(v)], obj,
                       hp.max_inner, hp.tol_x);
      s.maps[static_cast<std::size_t>(v)] = std::move(r.solution);
      iters[static_cast<std::size_t>(v)] = r.iterations;
    });
    long total = 0;
    for (int k : iters) total += k;
    return total;
  };
  auto objective = [&](const detail::AlternationState& s) { return objective_full(dataset.views, s.maps, s.X, obj); };

  // Every start runs to completion; the lowest final objective wins, ties
  // going to the earlier start.
  std::optional<FitResult> best;
  double best_value = 0.0;
  for (auto& state : starts) {
    FitResult r;
    r.history = detail::alternate(state, hp, options.divergence_tol, x_sweep, w_sweep, objective);
    const double value = objective(state);
    if (best && !(value < best_value)) continue;
    r.model.mode = ModelMode::Linear;
    r.model.W = std::move(state.maps);
    r.model.hyperparams = hp;
    r.embedding.X = std::move(state.X);
    best = std::move(r);
    best_value = value;
  }
  return std::move(*best);
}

}  // namespace intact
