// Synthetic multi-view generators: S-curve, plane projections, windowed noise.
#pragma once

#include "intact/types.hpp"

#include <filesystem>
#include <limits>

namespace intact {

struct NoiseSpec {
  double snr_db = 20.0;  // +infinity disables noise
  double window_fraction = 0.3;
  int copies_per_base = 3;
  std::uint64_t seed = 0;

  static constexpr double no_noise() { return std::numeric_limits<double>::infinity(); }
  void validate() const;
};

/// t ~ U[-3pi/2, 3pi/2], y ~ U[0, 2], point (sin t, y, sign(t)(cos t - 1)).
Matrix gen_s_curve(Eigen::Index n, std::uint64_t seed);

/// Views over the coordinate pairs (0,1), (0,2), (1,2).
std::vector<Matrix> project_to_planes(const Matrix& points3d);

/// Adds Gaussian noise to a seeded random window of ceil(window_fraction * n)
/// rows. The noise variance is var(windowed signal) / 10^(snr_db/10).
/// `stream` selects an independent RNG stream under spec.seed.
Matrix add_window_noise(const Matrix& view, const NoiseSpec& spec, std::uint64_t stream = 0);

/// Rows covered by the window add_window_noise would use.
std::vector<Eigen::Index> noise_window_rows(Eigen::Index n, const NoiseSpec& spec, std::uint64_t stream = 0);

/// copies_per_base noisy copies of each base view, base-major.
std::vector<Matrix> make_noisy_views(const std::vector<Matrix>& base_views, const NoiseSpec& spec);

/// Whitespace- or comma-separated "x y z" rows; '#' lines and blank lines skipped.
Matrix load_xyz_point_cloud(const std::filesystem::path& path);

/// Two labelled Gaussian blobs in 3-D with centres `separation` sigmas apart.
struct LabelledPoints {
  Matrix points;
  std::vector<int> labels;
};
LabelledPoints gen_gaussian_blobs(Eigen::Index per_class, double separation, std::uint64_t seed);

}  // namespace intact
