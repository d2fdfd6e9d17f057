// Outer alternation shared by the linear and kernel fits.
#pragma once

#include "intact/types.hpp"

#include <cmath>
#include <sstream>

namespace intact::detail {

struct AlternationState {
  Matrix X;
  std::vector<Matrix> maps;  // W_v or A_v
};

inline void check_descent(double before, double after, double tol, StepKind kind) {
  if (!std::isfinite(after) || after > before + tol * std::max(1.0, std::abs(before))) {
    std::ostringstream os;
    os.precision(17);
    os << to_string(kind) << " raised the objective from " << before << " to " << after;
    throw Error(ErrorCode::DivergenceDetected, os.str());
  }
}

/// x_sweep(state) and w_sweep(state) update their block in place and return
/// summed inner iterations; objective(state) evaluates the training objective.
/// A final x sweep always runs so X is optimal for the returned maps.
template <class XSweep, class WSweep, class Objective>
FitHistory alternate(AlternationState& s, const Hyperparams& hp, double divergence_tol, XSweep&& x_sweep,
                     WSweep&& w_sweep, Objective&& objective) {
  FitHistory history;
  double current = objective(s);
  history.initial_objective = current;

  auto record = [&](StepKind kind, double value) {
    check_descent(current, value, divergence_tol, kind);
    history.objective_trace.push_back({kind, value});
    current = value;
  };

  for (int outer = 1; outer <= hp.max_outer; ++outer) {
    const double start = current;
    const AlternationState prev = s;

    long inner = x_sweep(s);
    record(StepKind::XUpdate, objective(s));
    inner += w_sweep(s);
    record(StepKind::WUpdate, objective(s));
    history.inner_iterations.push_back(static_cast<int>(inner));

    if (start - current <= hp.tol_obj * std::max(std::abs(start), 1e-6)) {
      history.converged = true;
      history.stop_reason = StopReason::ObjectiveTol;
      break;
    }
    double change = (s.X - prev.X).norm();
    for (std::size_t v = 0; v < s.maps.size(); ++v) change = std::max(change, (s.maps[v] - prev.maps[v]).norm());
    if (change <= hp.tol_x) {
      history.converged = true;
      history.stop_reason = StopReason::IterateTol;
      break;
    }
  }

  history.inner_iterations.push_back(static_cast<int>(x_sweep(s)));
  record(StepKind::XUpdate, objective(s));
  return history;
}

}  // namespace intact::detail
