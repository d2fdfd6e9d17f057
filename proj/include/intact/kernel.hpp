// Kernelized generation maps for the shared latent representation.
//
// Each generation map lives in the span of the training feature images,
// phi(W_v) = phi(Z_v) A_v, so residuals and map norms reduce to gram algebra:
//
//   ||phi(z_i) - phi(W_v) x||^2 = K_ii - 2 (K A x)_i + x^T A^T K A x
//   ||phi(W_v)||^2              = trace(A^T K A)
#pragma once

#include "intact/irr.hpp"
#include "intact/types.hpp"

namespace intact {

double kernel_value(const KernelSpec& kernel, const Vector& a, const Vector& b);

/// K[i][j] = k(z_i, z_j), exactly symmetric.
Matrix gram(const Matrix& view_data, const KernelSpec& kernel);

/// [k(z, z_j)] over the training rows z_j.
Vector cross_kernel(const Matrix& training_view, const Vector& z, const KernelSpec& kernel);

/// 1 / median pairwise squared distance (1 when the median is 0).
double median_heuristic_gamma(const Matrix& view_data);

/// Fills in gamma for rbf specs that left it at 0.
KernelSpec resolve_kernel(const Matrix& view_data, KernelSpec kernel);

/// Adds 1e-10 * mean(diag) jitter when the smallest eigenvalue is below
/// -1e-8; throws GramNotPSD below -1e-4.
Matrix enforce_psd(Matrix K);

/// Builds grams for every view and zero atoms of width d.
KernelModel make_kernel_model(std::span<const Matrix> views, const KernelSpec& kernel, int d);

double kernel_residual_sq(Eigen::Index i, std::size_t v, const Vector& x, const KernelModel& km);
double kernel_w_norm_sq(std::size_t v, const KernelModel& km);

/// Kernel counterpart of objective_full over the current atoms.
double kernel_objective_full(const KernelModel& km, const Matrix& X, const Objective& obj);

/// Top-d kernel principal scores from the centred sum of view grams.
Matrix kernel_pca_init(std::span<const Matrix> grams, int d, std::uint64_t seed);

FitResult kernel_fit(const MultiViewDataset& dataset, const Hyperparams& hp, const KernelSpec& kernel,
                     const std::optional<FitInit>& init = {}, const FitOptions& options = {});

/// Out-of-sample latent point from cross-kernel vectors against the retained
/// training views.
Vector kernel_embed(std::span<const Vector> z_new, const IntactModel& model, const Hyperparams& hp);

}  // namespace intact
