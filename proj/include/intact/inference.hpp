// Out-of-sample embedding and multi-view stability diagnostics.
#pragma once

#include "intact/irr.hpp"
#include "intact/types.hpp"

namespace intact {

/// argmin_x (1/m) sum_v log(1 + ||z^v - W_v x||^2 / c^2) + C2 ||x||^2 by IRR,
/// started from the ridge least-squares point. Dispatches to kernel_embed for
/// kernel models.
Vector embed_example(std::span<const Vector> z_new, const IntactModel& model, const Hyperparams& hp);

/// Embeds every row of `views` (one matrix per view).
Matrix embed_views(std::span<const Matrix> views, const IntactModel& model, const Hyperparams& hp, int threads = 0);

/// Largest singular value of each W_v.
std::vector<double> spectral_norms(const IntactModel& model);

/// sqrt(2)/c |tau| + sum_v 128^{1/4} Omega_v / c * sqrt(|tau| / (m c C2)).
double stability_bound(double tau, const IntactModel& model, const Hyperparams& hp);

struct StabilityReport {
  double tau = 0.0;
  std::size_t view_index = 0;
  Eigen::Index coord_index = 0;
  double measured_deviation = 0.0;  // sum_v |f_v(z, x) - f_v(z_hat, x_hat)|
  double beta_bound = 0.0;
  bool holds = true;
  bool locally_convex = true;  // convexity inequalities along [x, x_hat] held
};

/// Perturbs coordinate `coord_index` of view `view_index` by tau, re-embeds
/// from the unperturbed solution and compares the per-view loss change with
/// the bound.
StabilityReport stability_probe(std::span<const Vector> z, const IntactModel& model, const Hyperparams& hp,
                                double tau, std::size_t view_index, Eigen::Index coord_index);

}  // namespace intact
