#include "helpers.hpp"

#include "intact/core.hpp"
#include "intact/estimators.hpp"
#include "intact/irr.hpp"
#include "intact/synth.hpp"

#include <cmath>

using namespace intact;
using testing::random_matrix;
using testing::random_vector;

namespace {

Matrix scalar(double a) { return Matrix::Constant(1, 1, a); }
Vector vec1(double a) { return Vector::Constant(1, a); }

struct Instance {
  std::vector<Vector> z;
  std::vector<Matrix> W;
  Vector x;
};

Instance random_instance(std::uint64_t seed, int m = 3, int dim = 5, int d = 3) {
  std::mt19937_64 rng(seed);
  Instance in;
  for (int v = 0; v < m; ++v) {
    in.W.push_back(random_matrix(dim, d, rng));
    in.z.push_back(random_vector(dim, rng, 2.0));
  }
  in.x = random_vector(d, rng);
  return in;
}

// Sum of Cauchy terms written out directly.
double brute_objective_x(const Instance& in, double c, double C2) {
  double s = 0.0;
  for (std::size_t v = 0; v < in.z.size(); ++v) {
    double r2 = 0.0;
    const Vector pred = in.W[v] * in.x;
    for (Eigen::Index k = 0; k < pred.size(); ++k) r2 += (in.z[v](k) - pred(k)) * (in.z[v](k) - pred(k));
    s += std::log(1.0 + r2 / (c * c));
  }
  return s / static_cast<double>(in.z.size()) + C2 * in.x.squaredNorm();
}

}  // namespace

TEST_CASE("objective_full examples") {
  const Objective obj{EstimatorKind::cauchy(1.0), 0.0, 0.0};
  const std::vector<Matrix> views{Matrix::Zero(3, 2)}, W{Matrix::Zero(2, 2)};
  CHECK(objective_full(views, W, Matrix::Zero(3, 2), obj) == 0.0);
  const std::vector<Matrix> v1{scalar(1.0)}, w1{scalar(1.0)};
  CHECK(objective_full(v1, w1, scalar(0.0), obj) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("objective_full against brute-force summation") {
  std::mt19937_64 rng(11);
  const int n = 6, m = 3, d = 2;
  std::vector<Matrix> views, W;
  for (int v = 0; v < m; ++v) {
    views.push_back(random_matrix(n, 4, rng));
    W.push_back(random_matrix(4, d, rng));
  }
  const Matrix X = random_matrix(n, d, rng);
  const double c = 0.8, C1 = 0.3, C2 = 0.2;
  double brute = 0.0;
  for (int v = 0; v < m; ++v)
    for (int i = 0; i < n; ++i) {
      const double r2 = (views[v].row(i).transpose() - W[v] * X.row(i).transpose()).squaredNorm();
      brute += std::log(1.0 + r2 / (c * c)) / (m * n);
    }
  for (int v = 0; v < m; ++v) brute += C1 / m * W[v].squaredNorm();
  for (int i = 0; i < n; ++i) brute += C2 / n * X.row(i).squaredNorm();
  CHECK(objective_full(views, W, X, {EstimatorKind::cauchy(c), C1, C2}) == doctest::Approx(brute).epsilon(1e-13));

  // F restricted to one latent point is objective_x / n up to a constant
  const Objective obj{EstimatorKind::cauchy(c), C1, C2};
  Matrix X2 = X;
  X2.row(2) += Eigen::RowVectorXd::Constant(d, 0.37);
  std::vector<Vector> z;
  for (int v = 0; v < m; ++v) z.emplace_back(views[v].row(2).transpose());
  const double dF = objective_full(views, W, X2, obj) - objective_full(views, W, X, obj);
  const double dJ = objective_x(z, W, X2.row(2).transpose(), obj) - objective_x(z, W, X.row(2).transpose(), obj);
  CHECK(dF == doctest::Approx(dJ / n).epsilon(1e-10));
}

TEST_CASE("objective_x examples and brute force") {
  const Objective obj{EstimatorKind::cauchy(1.0), 0.0, 0.1};
  const std::vector<Vector> z0{Vector::Zero(2), Vector::Zero(3)};
  std::mt19937_64 rng(1);
  const std::vector<Matrix> W0{random_matrix(2, 2, rng), random_matrix(3, 2, rng)};
  CHECK(objective_x(z0, W0, Vector::Zero(2), obj) == 0.0);
  const std::vector<Vector> z{vec1(2.0)};
  const std::vector<Matrix> W{scalar(1.0)};
  CHECK(objective_x(z, W, vec1(2.0), obj) == doctest::Approx(0.4));

  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto in = random_instance(s);
    CHECK(objective_x(in.z, in.W, in.x, {EstimatorKind::cauchy(1.7), 0.0, 0.05}) ==
          doctest::Approx(brute_objective_x(in, 1.7, 0.05)).epsilon(1e-13));
  }
}

TEST_CASE("grad_x examples and central differences") {
  const Objective plain{EstimatorKind::cauchy(1.0), 0.0, 0.0};
  const std::vector<Vector> z{vec1(0.0)};
  const std::vector<Matrix> W{scalar(1.0)};
  CHECK(grad_x(z, W, vec1(1.0), plain)(0) == doctest::Approx(1.0));
  const std::vector<Vector> z2{vec1(3.0)};
  CHECK(grad_x(z2, W, vec1(3.0), plain).norm() == 0.0);

  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto in = random_instance(100 + s);
    const Objective obj{EstimatorKind::cauchy(1.3), 0.0, 0.07};
    const Vector g = grad_x(in.z, in.W, in.x, obj);
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      const double h = 1e-5;
      Vector xp = in.x, xm = in.x;
      xp(k) += h;
      xm(k) -= h;
      const double fd = (objective_x(in.z, in.W, xp, obj) - objective_x(in.z, in.W, xm, obj)) / (2 * h);
      CHECK(g(k) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("update_x_once scalar examples") {
  const std::vector<Matrix> W{scalar(1.0)};
  const std::vector<Vector> z{vec1(2.0)};
  for (double x : {-3.0, 0.0, 5.0})
    CHECK(update_x_once(z, W, vec1(x), {EstimatorKind::cauchy(1.0), 0.0, 0.0})(0) == doctest::Approx(2.0));
  const std::vector<Vector> z1{vec1(1.0)};
  CHECK(update_x_once(z1, W, vec1(1.0), {EstimatorKind::cauchy(1.0), 0.0, 0.5})(0) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("solve_x: fixed point, monotone trace, grid-search oracle") {
  const Objective obj{EstimatorKind::cauchy(1.0), 0.0, 0.5};
  const std::vector<Matrix> W{scalar(1.0)};
  const std::vector<Vector> z{vec1(1.0)};
  const auto coarse = solve_x(z, W, vec1(1.0), obj, 200, 1e-6);
  for (std::size_t k = 1; k < coarse.objective_trace.size(); ++k)
    CHECK(coarse.objective_trace[k] < coarse.objective_trace[k - 1]);
  const auto r = solve_x(z, W, vec1(1.0), obj, 200, 1e-14);
  CHECK(r.objective_after < r.objective_before);

  // scalar minimizer by dense grid search
  double best = 0.0, best_val = INFINITY;
  for (int k = 0; k <= 200000; ++k) {
    const double x = -1.0 + 3.0 * k / 200000.0;
    const double val = objective_x(z, W, vec1(x), obj);
    if (val < best_val) best_val = val, best = x;
  }
  CHECK(r.solution(0) == doctest::Approx(best).epsilon(1e-4));

  const auto again = solve_x(z, W, r.solution, obj, 200, 1e-10);
  CHECK(again.iterations == 1);
  CHECK((again.solution - r.solution).norm() < 1e-10);
}

TEST_CASE("solve_x reaches a stationary point on random instances") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto in = random_instance(200 + s);
    const Objective obj{EstimatorKind::cauchy(1.0), 0.0, 0.05};
    const auto r = solve_x(in.z, in.W, in.x, obj, 5000, 1e-13);
    CHECK(grad_x(in.z, in.W, r.solution, obj).norm() < 1e-6);
    for (std::size_t k = 1; k < r.objective_trace.size(); ++k)
      CHECK(r.objective_trace[k] <= r.objective_trace[k - 1] * (1 + 1e-12) + 1e-15);
  }
}

TEST_CASE("update_w_once: zero-residual fixed point and transposed symmetry") {
  const Objective obj{EstimatorKind::cauchy(1.0), 0.0, 0.0};
  CHECK(update_w_once(scalar(1.0), scalar(1.0), scalar(1.0), obj)(0, 0) == doctest::Approx(1.0));

  // a single-output map is the latent subproblem with examples and maps swapped
  std::mt19937_64 rng(5);
  const int n = 7, d = 3;
  const Matrix view = random_matrix(n, 1, rng);
  const Matrix X = random_matrix(n, d, rng);
  const Matrix w0 = random_matrix(1, d, rng);
  const double C1 = 0.2;
  const Matrix w1 = update_w_once(view, X, w0, {EstimatorKind::cauchy(0.9), C1, 0.0});
  std::vector<Vector> z;
  std::vector<Matrix> maps;
  for (int i = 0; i < n; ++i) {
    z.push_back(vec1(view(i, 0)));
    maps.push_back(X.row(i));
  }
  const Vector x1 = update_x_once(z, maps, w0.transpose(), {EstimatorKind::cauchy(0.9), 0.0, C1});
  CHECK((w1.transpose() - x1).norm() < 1e-12);
  CHECK(objective_w(view, X, w0, {EstimatorKind::cauchy(0.9), C1, 0.0}) ==
        doctest::Approx(objective_x(z, maps, w0.transpose(), {EstimatorKind::cauchy(0.9), 0.0, C1})));
}

TEST_CASE("solve_w descends and stops at its fixed point") {
  std::mt19937_64 rng(9);
  const Matrix view = random_matrix(12, 4, rng);
  const Matrix X = random_matrix(12, 2, rng);
  const Objective obj{EstimatorKind::cauchy(1.0), 0.05, 0.0};
  const auto r = solve_w(view, X, random_matrix(4, 2, rng), obj, 2000, 1e-13);
  for (std::size_t k = 1; k < r.objective_trace.size(); ++k)
    CHECK(r.objective_trace[k] <= r.objective_trace[k - 1] + 1e-15);
  const auto again = solve_w(view, X, r.solution, obj, 10, 1e-9);
  CHECK(again.iterations == 1);

  // perturbing the fixed point entrywise never lowers the objective
  const double f0 = objective_w(view, X, r.solution, obj);
  for (Eigen::Index k = 0; k < r.solution.size(); ++k)
    for (double h : {-1e-3, 1e-3}) {
      Matrix w = r.solution;
      w(k) += h;
      CHECK(objective_w(view, X, w, obj) >= f0 - 1e-14);
    }
}

TEST_CASE("majorant: tangency, domination and closed-form minimizer") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto in = random_instance(300 + s);
    const Objective obj{EstimatorKind::cauchy(1.1), 0.0, 0.03};
    CHECK(majorant_value(in.x, in.x, in.z, in.W, obj) == objective_x(in.z, in.W, in.x, obj));
    std::mt19937_64 rng(s);
    for (int k = 0; k < 10; ++k) {
      const Vector y = in.x + random_vector(in.x.size(), rng, 2.0);
      CHECK(majorant_value(y, in.x, in.z, in.W, obj) >= objective_x(in.z, in.W, y, obj) - 1e-12);
    }
    const Vector xm = majorant_minimizer(in.x, in.z, in.W, obj);
    CHECK((xm - update_x_once(in.z, in.W, in.x, obj)).norm() < 1e-10);
    // minimizer of a convex quadratic: zero gradient by differences
    for (Eigen::Index k = 0; k < xm.size(); ++k) {
      Vector a = xm, b = xm;
      a(k) += 1e-4;
      b(k) -= 1e-4;
      CHECK(majorant_value(a, in.x, in.z, in.W, obj) >= majorant_value(xm, in.x, in.z, in.W, obj));
      CHECK(majorant_value(b, in.x, in.z, in.W, obj) >= majorant_value(xm, in.x, in.z, in.W, obj));
    }
  }
}

TEST_CASE("fit: monotone history, stationarity, thread determinism") {
  const auto base = project_to_planes(gen_s_curve(120, 4));
  const auto data = validate_dataset(base);
  Hyperparams hp;
  hp.C1 = 1e-3;
  hp.C2 = 1e-2;
  hp.max_outer = 300;
  hp.tol_obj = 1e-12;
  hp.tol_x = 1e-10;
  FitOptions one;
  one.threads = 1;
  const auto r1 = fit(data, hp, std::nullopt, one);
  CHECK(r1.history.monotone());
  for (std::size_t k = 0; k < r1.history.objective_trace.size(); ++k)
    CHECK(r1.history.objective_trace[k].kind == (k % 2 == 0 ? StepKind::XUpdate : StepKind::WUpdate));
  const double final = objective_full(data, r1.model, r1.embedding);
  CHECK(final <= r1.history.initial_objective);

  const Objective obj = Objective::from(hp);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    worst = std::max(worst, grad_x(data.example(i), r1.model.W, r1.embedding.X.row(i).transpose(), obj).norm());
  CHECK(worst <= 1e-5);

  FitOptions many;
  many.threads = 4;
  const auto r4 = fit(data, hp, std::nullopt, many);
  CHECK(r4.embedding.X == r1.embedding.X);
  for (std::size_t v = 0; v < data.m(); ++v) CHECK(r4.model.W[v] == r1.model.W[v]);
}

TEST_CASE("fit honours a supplied initialisation and rejects bad shapes") {
  const auto data = validate_dataset(project_to_planes(gen_s_curve(30, 2)));
  Hyperparams hp;
  hp.d = 2;
  hp.max_outer = 3;
  FitInit init{ridge_init(data.views, pca_init(data.views, 2, 0), hp.C1), pca_init(data.views, 2, 0)};
  CHECK_NOTHROW(fit(data, hp, init));
  init.X = Matrix::Zero(5, 2);
  testing::check_throws_code([&] { fit(data, hp, init); }, ErrorCode::ShapeMismatch);
}
