#include "intact/inference.hpp"

#include "intact/kernel.hpp"
#include "parallel.hpp"

#include <cmath>

namespace intact {

namespace {

void check_linear_example(std::span<const Vector> z, const IntactModel& model) {
  if (z.size() != model.W.size()) throw Error(ErrorCode::ShapeMismatch, "example view count differs from model");
  for (std::size_t v = 0; v < z.size(); ++v)
    if (z[v].size() != model.W[v].rows())
      throw Error(ErrorCode::ShapeMismatch, "view " + std::to_string(v) + " dimension differs from model");
}

double view_loss(const Vector& z, const Matrix& W, const Vector& x, double c) {
  return cauchy_rho((z - W * x).norm(), c);
}

// R(z, x) = (1/m) sum_v log(1 + ||z^v - W_v x||^2 / c^2)
double mean_loss(std::span<const Vector> z, const IntactModel& model, const Vector& x, double c) {
  double sum = 0.0;
  for (std::size_t v = 0; v < z.size(); ++v) sum += view_loss(z[v], model.W[v], x, c);
  return sum / static_cast<double>(z.size());
}

}  // namespace

Vector embed_example(std::span<const Vector> z_new, const IntactModel& model, const Hyperparams& hp) {
  if (model.mode == ModelMode::Kernel) return kernel_embed(z_new, model, hp);
  check_linear_example(z_new, model);
  const auto grams = view_grams(model.W);
  const XProblem p = make_x_problem(z_new, model.W, grams, Objective::from(hp));
  return p.solve(p.start_point(model.W.front().cols()), hp.max_inner, hp.tol_x).solution;
}

Matrix embed_views(std::span<const Matrix> views, const IntactModel& model, const Hyperparams& hp, int threads) {
  if (views.empty()) throw Error(ErrorCode::EmptyView, "no views to embed");
  const auto n = views.front().rows();
  for (const auto& v : views)
    if (v.rows() != n) throw Error(ErrorCode::ShapeMismatch, "views disagree on row count");
  Matrix X(n, hp.d);
  detail::parallel_for(n, threads, [&](long i) {
    std::vector<Vector> z;
    for (const auto& v : views) z.emplace_back(v.row(i).transpose());
    X.row(i) = embed_example(z, model, hp).transpose();
  });
  return X;
}

std::vector<double> spectral_norms(const IntactModel& model) {
  if (model.mode != ModelMode::Linear) throw Error(ErrorCode::InvalidArgument, "spectral norms need a linear model");
  std::vector<double> out;
  for (const auto& w : model.W) {
    Eigen::JacobiSVD<Matrix> svd(w);
    out.push_back(svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
  }
  return out;
}

double stability_bound(double tau, const IntactModel& model, const Hyperparams& hp) {
  if (!(hp.C2 > 0.0)) throw Error(ErrorCode::ZeroRegularizer, "stability bound needs C2 > 0");
  if (!(hp.c > 0.0)) throw Error(ErrorCode::NonPositiveScale, "c must be positive");
  const double t = std::abs(tau);
  const double c = hp.c;
  const double m = static_cast<double>(model.W.size());
  double omega_sum = 0.0;
  for (double omega : spectral_norms(model)) omega_sum += omega;
  return std::sqrt(2.0) / c * t + std::pow(128.0, 0.25) * omega_sum / c * std::sqrt(t / (m * c * hp.C2));
}

StabilityReport stability_probe(std::span<const Vector> z, const IntactModel& model, const Hyperparams& hp,
                                double tau, std::size_t view_index, Eigen::Index coord_index) {
  if (model.mode != ModelMode::Linear) throw Error(ErrorCode::InvalidArgument, "stability probe needs a linear model");
  check_linear_example(z, model);
  if (view_index >= z.size()) throw Error(ErrorCode::IndexOutOfRange, "view index " + std::to_string(view_index));
  if (coord_index < 0 || coord_index >= z[view_index].size())
    throw Error(ErrorCode::IndexOutOfRange, "coordinate index " + std::to_string(coord_index));

  StabilityReport report;
  report.tau = tau;
  report.view_index = view_index;
  report.coord_index = coord_index;
  report.beta_bound = stability_bound(tau, model, hp);

  // Both points get the same warm-started polish so tau = 0 reproduces x exactly.
  const Vector x0 = embed_example(z, model, hp);
  std::vector<Vector> z_hat(z.begin(), z.end());
  z_hat[view_index](coord_index) += tau;
  const Vector x = solve_x(z, model, x0, hp).solution;
  const Vector x_hat = solve_x(z_hat, model, x0, hp).solution;

  double deviation = 0.0;
  for (std::size_t v = 0; v < z.size(); ++v)
    deviation += std::abs(view_loss(z[v], model.W[v], x, hp.c) - view_loss(z_hat[v], model.W[v], x_hat, hp.c));
  report.measured_deviation = deviation;
  report.holds = deviation <= report.beta_bound;

  // Convexity of R(z_hat, .) along the segment, as assumed by the bound.
  const Vector delta = x_hat - x;
  const double r_x = mean_loss(z_hat, model, x, hp.c);
  const double r_xh = mean_loss(z_hat, model, x_hat, hp.c);
  const double slack = 1e-12 * std::max(1.0, std::abs(r_x) + std::abs(r_xh));
  for (int k = 1; k < 10 && report.locally_convex; ++k) {
    const double t = k / 10.0;
    const bool first = mean_loss(z_hat, model, x + t * delta, hp.c) - r_x <= t * (r_xh - r_x) + slack;
    const bool second = mean_loss(z_hat, model, x_hat - t * delta, hp.c) - r_xh <= t * (r_x - r_xh) + slack;
    report.locally_convex = first && second;
  }
  return report;
}

}  // namespace intact
