// Evaluation: reconstruction error, latent-space alignment, k-NN accuracy and
// the Cauchy-versus-L2 contamination benchmark.
#pragma once

#include "intact/irr.hpp"
#include "intact/types.hpp"

namespace intact {

/// (1/mn) sum_v sum_i log(1 + ||z_i^v - W_v x_i||^2 / c^2)
double reconstruction_error(const MultiViewDataset& dataset, const IntactModel& model, const IntactEmbedding& X);

/// Mean squared entry error of W_v x_i against reference views.
double squared_reconstruction_error(std::span<const Matrix> reference, const IntactModel& model, const Matrix& X);

struct AlignmentScore {
  double relative_residual = 0.0;
  Matrix map;     // d x d
  Vector offset;  // column-mean shift absorbed before the linear fit
};

/// min_A ||Xt - Xe A||_F / ||Xt||_F after centring both column-wise, so the
/// score is invariant to any invertible affine reparameterization of X_est.
AlignmentScore align_to_truth(const Matrix& X_est, const Matrix& X_true);

struct KnnResult {
  std::vector<int> predicted;
  std::optional<double> accuracy;
};

/// Majority vote over the k Euclidean-nearest training rows. Distance ties
/// prefer the lower label; vote ties prefer the smaller summed distance, then
/// the lower label.
KnnResult knn_classify(const Matrix& train_X, const std::vector<int>& train_labels, const Matrix& test_X, int k,
                       const std::optional<std::vector<int>>& test_labels = std::nullopt);

struct PlantedModel {
  std::vector<Matrix> views;  // clean z_i^v = W_v x_i (+ optional noise)
  std::vector<Matrix> W;
  Matrix X;
};

/// Gaussian latent points and maps; entries of every map are N(0, 1/d).
PlantedModel gen_planted_linear(Eigen::Index n, std::size_t m, Eigen::Index view_dim, int d, double noise_sd,
                                std::uint64_t seed);

/// Adds sign * magnitude * sd(view) to round(rate * n * D) seeded random entries.
Matrix contaminate_entries(const Matrix& view, double rate, double magnitude, std::uint64_t seed);

struct RobustnessReport {
  double contamination_rate = 0.0;
  double cauchy_error = 0.0;
  double l2_error = 0.0;
  double ratio = 0.0;  // cauchy / l2
};

/// Contaminates view 0 of `clean_views`, fits the Cauchy model and an
/// alternating ridge baseline with the same schedule, and scores both by mean
/// squared reconstruction error against the clean views.
RobustnessReport robustness_benchmark(const std::vector<Matrix>& clean_views, double contamination_rate,
                                      double magnitude, const Hyperparams& hp, const FitOptions& options = {});

}  // namespace intact
