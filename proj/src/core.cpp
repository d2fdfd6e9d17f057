#include "intact/core.hpp"

#include <cmath>
#include <sstream>

namespace intact {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::EmptyView: return "EmptyView";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::NegativeResidual: return "NegativeResidual";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::GramNotPSD: return "GramNotPSD";
    case ErrorCode::ZeroRegularizer: return "ZeroRegularizer";
    case ErrorCode::DegenerateSignal: return "DegenerateSignal";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingInput: return "MissingInput";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

const char* to_string(StepKind kind) {
  return kind == StepKind::XUpdate ? "x-update" : "W-update";
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::ObjectiveTol: return "objective_tol";
    case StopReason::IterateTol: return "iterate_tol";
    case StopReason::MaxIter: return "max_iter";
  }
  return "unknown";
}

void Hyperparams::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::NonPositiveScale, "c must be > 0");
  if (!(C1 >= 0.0) || !std::isfinite(C1)) fail("C1 must be >= 0");
  if (!(C2 >= 0.0) || !std::isfinite(C2)) fail("C2 must be >= 0");
  if (d < 1) fail("d must be >= 1");
  if (max_outer < 1) fail("max_outer must be >= 1");
  if (max_inner < 1) fail("max_inner must be >= 1");
  if (!(tol_obj > 0.0)) fail("tol_obj must be > 0");
  if (!(tol_x > 0.0)) fail("tol_x must be > 0");
}

std::vector<Eigen::Index> MultiViewDataset::view_dims() const {
  std::vector<Eigen::Index> dims;
  dims.reserve(views.size());
  for (const auto& v : views) dims.push_back(v.cols());
  return dims;
}

std::vector<Vector> MultiViewDataset::example(Eigen::Index i) const {
  std::vector<Vector> z;
  z.reserve(views.size());
  for (const auto& v : views) z.emplace_back(v.row(i).transpose());
  return z;
}

std::size_t IntactModel::m() const {
  if (mode == ModelMode::Kernel && kernel_part) return kernel_part->atoms.size();
  return W.size();
}

void IntactModel::check() const {
  if (mode == ModelMode::Linear) {
    if (W.empty() || kernel_part) throw Error(ErrorCode::ShapeMismatch, "linear model needs W only");
    for (const auto& w : W)
      if (w.cols() != hyperparams.d) throw Error(ErrorCode::ShapeMismatch, "W_v must have d columns");
  } else {
    if (!W.empty() || !kernel_part) throw Error(ErrorCode::ShapeMismatch, "kernel model needs atoms only");
    const auto& kp = *kernel_part;
    const auto m = kp.atoms.size();
    if (m == 0 || kp.training_views.size() != m || kp.grams.size() != m || kp.kernels.size() != m)
      throw Error(ErrorCode::ShapeMismatch, "kernel model parts disagree on view count");
    for (std::size_t v = 0; v < m; ++v) {
      const auto n = kp.training_views[v].rows();
      if (kp.atoms[v].rows() != n || kp.atoms[v].cols() != hyperparams.d || kp.grams[v].rows() != n)
        throw Error(ErrorCode::ShapeMismatch, "atom/gram shape mismatch in view " + std::to_string(v));
    }
  }
}

bool FitHistory::monotone(double rel_tol) const {
  double prev = initial_objective;
  if (!std::isfinite(prev)) return false;
  for (const auto& e : objective_trace) {
    if (!std::isfinite(e.objective)) return false;
    if (e.objective > prev + rel_tol * std::max(1.0, std::abs(prev))) return false;
    prev = e.objective;
  }
  return true;
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

MultiViewDataset validate_dataset(std::vector<Matrix> views, std::optional<std::vector<int>> labels) {
  if (views.empty()) throw Error(ErrorCode::EmptyView, "at least one view is required");
  const auto n = views.front().rows();
  for (std::size_t v = 0; v < views.size(); ++v) {
    const auto& z = views[v];
    if (z.rows() == 0 || z.cols() == 0)
      throw Error(ErrorCode::EmptyView, "view " + std::to_string(v) + " is empty");
    if (z.rows() != n) {
      std::ostringstream os;
      os << "view " << v << " has " << z.rows() << " rows, expected " << n;
      throw Error(ErrorCode::ShapeMismatch, os.str());
    }
    if (!z.allFinite())
      throw Error(ErrorCode::NonFiniteInput, "view " + std::to_string(v) + " contains NaN or Inf");
  }
  if (labels && static_cast<Eigen::Index>(labels->size()) != n)
    throw Error(ErrorCode::ShapeMismatch, "label count differs from example count");
  return MultiViewDataset{std::move(views), std::move(labels)};
}

std::pair<MultiViewDataset, Standardization> standardize_views(const MultiViewDataset& dataset) {
  Standardization record;
  MultiViewDataset out;
  out.labels = dataset.labels;
  for (const auto& z : dataset.views) {
    const auto n = static_cast<double>(z.rows());
    Vector mean = z.colwise().mean().transpose();
    Vector scale(z.cols());
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const double var = (z.col(j).array() - mean(j)).square().sum() / n;
      const double sd = std::sqrt(var);
      scale(j) = sd > 0.0 ? sd : 1.0;
    }
    record.mean.push_back(mean);
    record.scale.push_back(scale);
  }
  for (std::size_t v = 0; v < dataset.views.size(); ++v) out.views.push_back(record.apply(v, dataset.views[v]));
  return {std::move(out), std::move(record)};
}

Matrix Standardization::apply(std::size_t view, const Matrix& raw) const {
  if (view >= mean.size() || raw.cols() != mean[view].size())
    throw Error(ErrorCode::DimensionMismatch, "standardization record does not match view " + std::to_string(view));
  Matrix out(raw.rows(), raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j)
    out.col(j) = (raw.col(j).array() - mean[view](j)) / scale[view](j);
  return out;
}

Matrix Standardization::invert(std::size_t view, const Matrix& standardized) const {
  if (view >= mean.size() || standardized.cols() != mean[view].size())
    throw Error(ErrorCode::DimensionMismatch, "standardization record does not match view " + std::to_string(view));
  Matrix out(standardized.rows(), standardized.cols());
  for (Eigen::Index j = 0; j < standardized.cols(); ++j)
    out.col(j) = standardized.col(j).array() * scale[view](j) + mean[view](j);
  return out;
}

std::vector<Vector> Standardization::apply_example(const std::vector<Vector>& raw) const {
  std::vector<Vector> out;
  out.reserve(raw.size());
  for (std::size_t v = 0; v < raw.size(); ++v) out.emplace_back(apply(v, raw[v].transpose()).transpose());
  return out;
}

}  // namespace intact
