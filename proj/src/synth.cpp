#include "intact/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace intact {

namespace {

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

void NoiseSpec::validate() const {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "window_fraction must lie in (0, 1]");
  if (copies_per_base < 1) throw Error(ErrorCode::InvalidArgument, "copies_per_base must be >= 1");
  if (std::isnan(snr_db)) throw Error(ErrorCode::InvalidArgument, "snr_db is NaN");
}

Matrix gen_s_curve(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-1.5 * std::numbers::pi, 1.5 * std::numbers::pi);
  std::uniform_real_distribution<double> height(0.0, 2.0);
  Matrix p(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = angle(rng);
    const double sign = t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
    p(i, 0) = std::sin(t);
    p(i, 1) = height(rng);
    p(i, 2) = sign * (std::cos(t) - 1.0);
  }
  return p;
}

std::vector<Matrix> project_to_planes(const Matrix& points3d) {
  if (points3d.cols() != 3) throw Error(ErrorCode::ShapeMismatch, "expected n x 3 points");
  if (!points3d.allFinite()) throw Error(ErrorCode::NonFiniteInput, "points contain NaN or Inf");
  std::vector<Matrix> views;
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (const auto& pr : pairs) {
    Matrix v(points3d.rows(), 2);
    v.col(0) = points3d.col(pr[0]);
    v.col(1) = points3d.col(pr[1]);
    views.push_back(std::move(v));
  }
  return views;
}

std::vector<Eigen::Index> noise_window_rows(Eigen::Index n, const NoiseSpec& spec, std::uint64_t stream) {
  spec.validate();
  auto rng = stream_rng(spec.seed, stream);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto width = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(std::ceil(spec.window_fraction * n)));
  std::uniform_int_distribution<Eigen::Index> start_dist(0, n - width);
  const auto start = start_dist(rng);
  std::vector<Eigen::Index> rows(order.begin() + start, order.begin() + start + width);
  std::sort(rows.begin(), rows.end());
  return rows;
}

Matrix add_window_noise(const Matrix& view, const NoiseSpec& spec, std::uint64_t stream) {
  spec.validate();
  if (std::isinf(spec.snr_db) && spec.snr_db > 0.0) return view;
  const auto rows = noise_window_rows(view.rows(), spec, stream);
  if (rows.empty()) return view;

  double mean = 0.0;
  for (auto r : rows) mean += view.row(r).sum();
  const double count = static_cast<double>(rows.size() * static_cast<std::size_t>(view.cols()));
  mean /= count;
  double var = 0.0;
  for (auto r : rows) var += (view.row(r).array() - mean).square().sum();
  var /= count;
  if (!(var > 0.0)) throw Error(ErrorCode::DegenerateSignal, "windowed signal has zero variance");

  const double noise_sd = std::sqrt(var / std::pow(10.0, spec.snr_db / 10.0));
  // noise draws use their own stream so the window is independent of them
  auto rng = stream_rng(spec.seed, stream ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, noise_sd);
  Matrix out = view;
  for (auto r : rows)
    for (Eigen::Index j = 0; j < view.cols(); ++j) out(r, j) += normal(rng);
  return out;
}

std::vector<Matrix> make_noisy_views(const std::vector<Matrix>& base_views, const NoiseSpec& spec) {
  spec.validate();
  std::vector<Matrix> out;
  out.reserve(base_views.size() * static_cast<std::size_t>(spec.copies_per_base));
  for (std::size_t b = 0; b < base_views.size(); ++b)
    for (int k = 0; k < spec.copies_per_base; ++k)
      out.push_back(add_window_noise(base_views[b], spec, (static_cast<std::uint64_t>(b) << 32) | static_cast<std::uint64_t>(k)));
  return out;
}

Matrix load_xyz_point_cloud(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<double> values;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::vector<double> row;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": bad number '" + tok + "'");
      }
    }
    if (row.size() != 3)
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": expected 3 fields, got " +
                                             std::to_string(row.size()));
    values.insert(values.end(), row.begin(), row.end());
  }
  const auto n = static_cast<Eigen::Index>(values.size() / 3);
  Matrix p(n, 3);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) p(i, j) = values[static_cast<std::size_t>(i * 3 + j)];
  return p;
}

LabelledPoints gen_gaussian_blobs(Eigen::Index per_class, double separation, std::uint64_t seed) {
  if (per_class < 1) throw Error(ErrorCode::InvalidArgument, "per_class must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  LabelledPoints out;
  out.points.resize(2 * per_class, 3);
  // centres separated along the diagonal so every plane projection sees the gap
  const Vector offset = Vector::Constant(3, separation / std::sqrt(3.0));
  for (Eigen::Index i = 0; i < 2 * per_class; ++i) {
    const int label = i < per_class ? 0 : 1;
    for (Eigen::Index j = 0; j < 3; ++j) out.points(i, j) = normal(rng) + (label == 1 ? offset(j) : 0.0);
    out.labels.push_back(label);
  }
  return out;
}

}  // namespace intact
