#include "intact/estimators.hpp"

#include "intact/types.hpp"

#include <cmath>

namespace intact {

namespace {

void require_scale(double c) {
  if (!(c > 0.0)) throw Error(ErrorCode::NonPositiveScale, "Cauchy scale must be positive");
}

}  // namespace

EstimatorKind EstimatorKind::cauchy(double c) {
  require_scale(c);
  return {Kind::Cauchy, c};
}

EstimatorKind EstimatorKind::l1(double epsilon_smooth) {
  if (!(epsilon_smooth > 0.0)) throw Error(ErrorCode::InvalidArgument, "L1 smoothing must be positive");
  return {Kind::L1, epsilon_smooth};
}

double cauchy_rho(double t, double c) {
  require_scale(c);
  const double s = t / c;
  return std::log1p(s * s);
}

double cauchy_psi(double t, double c) {
  require_scale(c);
  return 2.0 * t / (c * c + t * t);
}

double residual_weight(double r_sq, double c) {
  require_scale(c);
  if (r_sq < 0.0) throw Error(ErrorCode::NegativeResidual, "squared residual must be non-negative");
  return 1.0 / (c * c + r_sq);
}

double baseline_rho(const EstimatorKind& kind, double t) {
  switch (kind.kind) {
    case EstimatorKind::Kind::L2: return 0.5 * t * t;
    case EstimatorKind::Kind::L1: {
      const double eps = kind.param;
      return std::sqrt(t * t + eps * eps) - eps;
    }
    case EstimatorKind::Kind::Cauchy: return cauchy_rho(t, kind.param);
  }
  return 0.0;
}

double loss_of_sq(const EstimatorKind& kind, double u) {
  switch (kind.kind) {
    case EstimatorKind::Kind::Cauchy: return std::log1p(u / (kind.param * kind.param));
    case EstimatorKind::Kind::L2: return u;
    case EstimatorKind::Kind::L1: {
      const double eps = kind.param;
      return std::sqrt(u + eps * eps) - eps;
    }
  }
  return 0.0;
}

double weight_of_sq(const EstimatorKind& kind, double u) {
  switch (kind.kind) {
    case EstimatorKind::Kind::Cauchy: return 1.0 / (kind.param * kind.param + u);
    case EstimatorKind::Kind::L2: return 1.0;
    case EstimatorKind::Kind::L1: return 0.5 / std::sqrt(u + kind.param * kind.param);
  }
  return 0.0;
}

}  // namespace intact
