// Multi-view latent representation learning by alternating Iteratively Reweighted
// Residuals (IRR) solves over the latent points and the generation maps.
//
// Training objective (linear mode):
//
//   F(X, W) = 1/(mn) sum_v sum_i rho(||z_i^v - W_v x_i||^2)
//           + C1/m sum_v ||W_v||_F^2 + C2/n sum_i ||x_i||^2
//
// With this normalization F restricted to one latent point is exactly
// (1/n) * objective_x and F restricted to one map is (1/m) * objective_w, so
// every IRR half step is a block majorize-minimize step on F.
#pragma once

#include "intact/estimators.hpp"
#include "intact/types.hpp"
#include "intact/x_problem.hpp"

#include <span>

namespace intact {

// ---- objectives ----------------------------------------------------------

double objective_full(std::span<const Matrix> views, std::span<const Matrix> W, const Matrix& X,
                      const Objective& obj);
double objective_full(const MultiViewDataset& dataset, const IntactModel& model, const IntactEmbedding& X);

/// (1/m) sum_v rho(||z^v - W_v x||^2) + C2 ||x||^2
double objective_x(std::span<const Vector> z, std::span<const Matrix> W, const Vector& x, const Objective& obj);
double objective_x(std::span<const Vector> z, const IntactModel& model, const Vector& x);

/// (1/n) sum_i rho(||z_i - W x_i||^2) + C1 ||W||_F^2 for a single view.
double objective_w(const Matrix& view_data, const Matrix& X, const Matrix& W, const Objective& obj);

Vector grad_x(std::span<const Vector> z, std::span<const Matrix> W, const Vector& x, const Objective& obj);
Vector grad_x(std::span<const Vector> z, const IntactModel& model, const Vector& x);

// ---- latent-point subproblem ----------------------------------------------

/// Builds the quadratic-form subproblem for one example under linear maps.
/// `grams` must hold W_v^T W_v and outlive the returned problem.
XProblem make_x_problem(std::span<const Vector> z, std::span<const Matrix> W, std::span<const Matrix> grams,
                        const Objective& obj);
std::vector<Matrix> view_grams(std::span<const Matrix> W);

Vector update_x_once(std::span<const Vector> z, std::span<const Matrix> W, const Vector& x_current,
                     const Objective& obj);
Vector update_x_once(std::span<const Vector> z, const IntactModel& model, const Vector& x_current);

SubproblemResult<Vector> solve_x(std::span<const Vector> z, std::span<const Matrix> W, const Vector& x0,
                                 const Objective& obj, int max_inner, double tol_x);
SubproblemResult<Vector> solve_x(std::span<const Vector> z, const IntactModel& model, const Vector& x0,
                                 const Hyperparams& hp);

// ---- generation-map subproblem ---------------------------------------------

Matrix update_w_once(const Matrix& view_data, const Matrix& X, const Matrix& w_current, const Objective& obj);
Matrix update_w_once(const Matrix& view_data, const IntactEmbedding& X, const Matrix& w_current,
                     const Hyperparams& hp);

SubproblemResult<Matrix> solve_w(const Matrix& view_data, const Matrix& X, const Matrix& w0, const Objective& obj,
                                 int max_inner, double tol_x);
SubproblemResult<Matrix> solve_w(const Matrix& view_data, const IntactEmbedding& X, const Matrix& w0,
                                 const Hyperparams& hp);

// ---- majorant diagnostics ---------------------------------------------------

/// C(x_k) = (1/m) sum_v Q_v W_v^T W_v + C2 I.
Matrix majorant_curvature(std::span<const Vector> z, std::span<const Matrix> W, const Vector& x_k,
                          const Objective& obj);

/// psi(x; x_k) = J(x_k) + (x - x_k)^T J'(x_k) + (x - x_k)^T C(x_k) (x - x_k).
double majorant_value(const Vector& x, const Vector& x_k, std::span<const Vector> z, std::span<const Matrix> W,
                      const Objective& obj);
double majorant_value(const Vector& x, const Vector& x_k, std::span<const Vector> z, const IntactModel& model,
                      const Hyperparams& hp);

/// Closed-form minimizer x_k - C(x_k)^{-1} J'(x_k) / 2 of the majorant.
Vector majorant_minimizer(const Vector& x_k, std::span<const Vector> z, std::span<const Matrix> W,
                          const Objective& obj);

// ---- alternating fit --------------------------------------------------------

struct FitInit {
  std::vector<Matrix> W;  // D_v x d, or n x d atoms in kernel mode
  Matrix X;               // n x d
};

struct FitOptions {
  std::optional<EstimatorKind> loss;  // defaults to Cauchy(hp.c)
  int threads = 0;                    // 0 uses the OpenMP default
  double divergence_tol = 1e-6;       // relative rise that aborts the fit
  bool multi_start = true;            // also try leave-one-view-out starts
};

struct FitResult {
  IntactModel model;
  IntactEmbedding embedding;
  FitHistory history;
};

/// Top-d principal scores of the column-centred concatenated views; columns the
/// data cannot fill are seeded Gaussian scaled by 1/sqrt(d).
Matrix pca_init(std::span<const Matrix> views, int d, std::uint64_t seed);

/// The principal-score start, followed (when `leave_one_out` and m >= 3) by
/// one start per view computed from the remaining views, so a single grossly
/// corrupted view cannot dictate the basin.
std::vector<Matrix> candidate_starts(std::span<const Matrix> views, int d, std::uint64_t seed, bool leave_one_out);

/// X^T X + n C1 I, with a tiny ridge added when C1 = 0 leaves it singular.
Matrix ridge_system(const Matrix& X, double C1);

/// One ridge least-squares solve of every view against X.
std::vector<Matrix> ridge_init(std::span<const Matrix> views, const Matrix& X, double C1);

/// Alternating IRR from `init`, or from every candidate start when no init is
/// given; the run with the lowest final objective is returned.
FitResult fit(const MultiViewDataset& dataset, const Hyperparams& hp, const std::optional<FitInit>& init = {},
              const FitOptions& options = {});

}  // namespace intact
