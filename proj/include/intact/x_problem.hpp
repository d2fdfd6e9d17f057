// The per-example latent subproblem in quadratic-form coordinates.
//
// Each view contributes a gram G_v (d x d), a right-hand side h_v (d) and a
// squared residual r_v(x). For linear maps G_v = W_v^T W_v, h_v = W_v^T z_v;
// kernel maps use A_v^T K_v A_v and A_v^T k_v(z). The IRR step is
//
//   x <- (sum_v Q_v G_v + m C2 I)^{-1} sum_v Q_v h_v,   Q_v = w(r_v(x)^2).
#pragma once

#include "intact/estimators.hpp"
#include "intact/types.hpp"

#include <functional>
#include <span>

namespace intact {

template <class T>
struct SubproblemResult {
  T solution;
  int iterations = 0;
  Vector final_residuals;  // squared residual norms at the solution
  double objective_before = 0.0;
  double objective_after = 0.0;
  std::vector<double> objective_trace;  // starting value, then one per iteration
};

/// Loss family plus the two ridge weights; everything the objective needs
/// besides the data and the current iterate.
struct Objective {
  EstimatorKind loss;
  double C1 = 0.0;
  double C2 = 0.0;

  static Objective from(const Hyperparams& hp) { return {EstimatorKind::cauchy(hp.c), hp.C1, hp.C2}; }
};

/// Solves `a * out = b` for symmetric positive definite `a`; throws
/// SingularSystem when the factorization fails or is numerically singular.
Matrix solve_spd(const Matrix& a, const Matrix& b, const char* what);

struct XProblem {
  std::span<const Matrix> gram;
  std::vector<Vector> rhs;
  std::function<double(std::size_t, const Vector&)> residual_sq;
  Objective objective;

  std::size_t m() const { return gram.size(); }
  Vector residuals_sq(const Vector& x) const;
  double value(const Vector& x) const;
  Vector weights(const Vector& x) const;
  Vector update(const Vector& x) const;
  /// The reweighted step with every view at its zero-residual weight: the
  /// ridge least-squares point. Zero when that system is singular.
  Vector start_point(Eigen::Index d) const;
  SubproblemResult<Vector> solve(const Vector& x0, int max_inner, double tol_x) const;
};

}  // namespace intact
