// Domain types shared by every intact-space module.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace intact {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ErrorCode {
  ShapeMismatch,
  NonFiniteInput,
  EmptyView,
  InvalidArgument,
  NonPositiveScale,
  NegativeResidual,
  SingularSystem,
  DivergenceDetected,
  IndexOutOfRange,
  GramNotPSD,
  ZeroRegularizer,
  DegenerateSignal,
  ParseError,
  IoError,
  RankDeficient,
  EmptyTrainingSet,
  DimensionMismatch,
  MissingInput,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct Hyperparams {
  double c = 1.0;      // Cauchy scale
  double C1 = 1e-3;    // generation-map regularizer
  double C2 = 1e-3;    // latent-point regularizer
  int d = 3;           // latent dimension
  int max_outer = 200;
  int max_inner = 100;
  double tol_obj = 1e-8;
  double tol_x = 1e-8;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument (or NonPositiveScale for c) on a broken invariant.
  void validate() const;
};

struct MultiViewDataset {
  std::vector<Matrix> views;               // view v is n x D_v
  std::optional<std::vector<int>> labels;  // one category id per example

  Eigen::Index n() const { return views.empty() ? 0 : views.front().rows(); }
  std::size_t m() const { return views.size(); }
  std::vector<Eigen::Index> view_dims() const;

  /// Row i of every view, as column vectors.
  std::vector<Vector> example(Eigen::Index i) const;
};

/// Per-view column statistics used to map raw features to unit scale and back.
struct Standardization {
  std::vector<Vector> mean;
  std::vector<Vector> scale;

  Matrix apply(std::size_t view, const Matrix& raw) const;
  Matrix invert(std::size_t view, const Matrix& standardized) const;
  std::vector<Vector> apply_example(const std::vector<Vector>& raw) const;
};

struct KernelSpec {
  enum class Kind { Linear, Rbf };
  Kind kind = Kind::Linear;
  double gamma = 0.0;  // rbf only; 0 means "pick by the median heuristic"

  static KernelSpec linear() { return {}; }
  static KernelSpec rbf(double gamma) { return {Kind::Rbf, gamma}; }
};

/// Kernelized generation maps expressed through atom matrices over the
/// training examples: phi(W_v) = phi(Z_v) A_v.
struct KernelModel {
  std::vector<Matrix> atoms;           // A_v, n_train x d
  std::vector<Matrix> training_views;  // Z_v, n_train x D_v
  std::vector<KernelSpec> kernels;     // per view, gamma resolved
  std::vector<Matrix> grams;           // K_v, n_train x n_train
};

enum class ModelMode { Linear, Kernel };

struct IntactModel {
  ModelMode mode = ModelMode::Linear;
  std::vector<Matrix> W;  // D_v x d, linear mode
  std::optional<KernelModel> kernel_part;
  Hyperparams hyperparams;
  std::optional<Standardization> standardization;

  std::size_t m() const;
  int d() const { return hyperparams.d; }

  /// Throws ShapeMismatch when the populated part disagrees with `mode`.
  void check() const;
};

struct IntactEmbedding {
  Matrix X;  // n x d
};

enum class StepKind { XUpdate, WUpdate };

enum class StopReason { ObjectiveTol, IterateTol, MaxIter };

const char* to_string(StepKind kind);
const char* to_string(StopReason reason);

struct TraceEntry {
  StepKind kind;
  double objective;
};

struct FitHistory {
  double initial_objective = 0.0;
  std::vector<TraceEntry> objective_trace;
  std::vector<int> inner_iterations;  // summed inner iterations per outer step
  bool converged = false;
  StopReason stop_reason = StopReason::MaxIter;

  /// True when every recorded value is finite and no half step rose by more
  /// than rel_tol * max(1, |previous|).
  bool monotone(double rel_tol = 1e-9) const;
};

}  // namespace intact
