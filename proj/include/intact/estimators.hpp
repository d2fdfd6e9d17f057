// Robust estimator kernels: rho, influence psi, and IRR residual weights.
#pragma once

namespace intact {

struct EstimatorKind {
  enum class Kind { Cauchy, L2, L1 };
  Kind kind = Kind::Cauchy;
  double param = 1.0;  // c for Cauchy, smoothing epsilon for L1, unused for L2

  static EstimatorKind cauchy(double c);
  static EstimatorKind l2() { return {Kind::L2, 0.0}; }
  static EstimatorKind l1(double epsilon_smooth = 1e-6);
};

/// log(1 + (t/c)^2)
double cauchy_rho(double t, double c);

/// 2t / (c^2 + t^2), the derivative of cauchy_rho.
double cauchy_psi(double t, double c);

/// 1 / (c^2 + r_sq)
double residual_weight(double r_sq, double c);

/// t^2/2 for L2, sqrt(t^2 + eps^2) - eps for L1, cauchy_rho for Cauchy.
double baseline_rho(const EstimatorKind& kind, double t);

// Loss on a squared residual norm u = ||r||^2, as used by the multi-view
// objective, and its derivative with respect to u. Every kind is concave in u,
// which is what makes each reweighted solve a majorize-minimize step.
//   Cauchy: log(1 + u/c^2),            weight 1/(c^2 + u)
//   L2:     u,                         weight 1
//   L1:     sqrt(u + eps^2) - eps,     weight 1/(2 sqrt(u + eps^2))
double loss_of_sq(const EstimatorKind& kind, double u);
double weight_of_sq(const EstimatorKind& kind, double u);

}  // namespace intact
