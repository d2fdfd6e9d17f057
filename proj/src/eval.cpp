#include "intact/eval.hpp"

#include "intact/core.hpp"
#include "intact/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace intact {

double reconstruction_error(const MultiViewDataset& dataset, const IntactModel& model, const IntactEmbedding& X) {
  if (model.mode != ModelMode::Linear) throw Error(ErrorCode::InvalidArgument, "reconstruction_error needs a linear model");
  Objective obj = Objective::from(model.hyperparams);
  obj.C1 = 0.0;
  obj.C2 = 0.0;
  if (X.X.rows() != dataset.n()) throw Error(ErrorCode::ShapeMismatch, "embedding rows differ from dataset n");
  return objective_full(dataset.views, model.W, X.X, obj);
}

double squared_reconstruction_error(std::span<const Matrix> reference, const IntactModel& model, const Matrix& X) {
  if (reference.size() != model.W.size()) throw Error(ErrorCode::ShapeMismatch, "view count differs from model");
  double sum = 0.0;
  double count = 0.0;
  for (std::size_t v = 0; v < reference.size(); ++v) {
    if (reference[v].rows() != X.rows() || reference[v].cols() != model.W[v].rows())
      throw Error(ErrorCode::ShapeMismatch, "reference view " + std::to_string(v) + " has the wrong shape");
    sum += (reference[v] - X * model.W[v].transpose()).squaredNorm();
    count += static_cast<double>(reference[v].size());
  }
  return sum / count;
}

AlignmentScore align_to_truth(const Matrix& X_est, const Matrix& X_true) {
  if (X_est.rows() != X_true.rows() || X_est.rows() == 0)
    throw Error(ErrorCode::ShapeMismatch, "estimate and truth differ in row count");
  const Vector est_mean = X_est.colwise().mean().transpose();
  const Vector true_mean = X_true.colwise().mean().transpose();
  const Matrix E = X_est.rowwise() - est_mean.transpose();
  const Matrix T = X_true.rowwise() - true_mean.transpose();

  Eigen::ColPivHouseholderQR<Matrix> qr(E);
  qr.setThreshold(1e-10);
  if (qr.rank() < E.cols()) throw Error(ErrorCode::RankDeficient, "estimate does not have full column rank");

  AlignmentScore s;
  s.map = qr.solve(T);
  s.offset = true_mean - s.map.transpose() * est_mean;
  const double denom = T.norm();
  const double resid = (T - E * s.map).norm();
  s.relative_residual = denom > 0.0 ? resid / denom : resid;
  return s;
}

KnnResult knn_classify(const Matrix& train_X, const std::vector<int>& train_labels, const Matrix& test_X, int k,
                       const std::optional<std::vector<int>>& test_labels) {
  if (train_X.rows() == 0) throw Error(ErrorCode::EmptyTrainingSet, "no training rows");
  if (static_cast<Eigen::Index>(train_labels.size()) != train_X.rows())
    throw Error(ErrorCode::ShapeMismatch, "training labels differ from training rows");
  if (k < 1 || k > train_X.rows()) throw Error(ErrorCode::InvalidArgument, "k must lie in [1, training size]");
  if (train_X.cols() != test_X.cols()) throw Error(ErrorCode::ShapeMismatch, "train and test dimensions differ");
  if (test_labels && static_cast<Eigen::Index>(test_labels->size()) != test_X.rows())
    throw Error(ErrorCode::ShapeMismatch, "test labels differ from test rows");

  KnnResult out;
  out.predicted.reserve(static_cast<std::size_t>(test_X.rows()));
  std::vector<std::pair<double, int>> cand(static_cast<std::size_t>(train_X.rows()));
  for (Eigen::Index t = 0; t < test_X.rows(); ++t) {
    for (Eigen::Index j = 0; j < train_X.rows(); ++j)
      cand[static_cast<std::size_t>(j)] = {(train_X.row(j) - test_X.row(t)).norm(), train_labels[static_cast<std::size_t>(j)]};
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    std::map<int, std::pair<int, double>> votes;  // label -> (count, summed distance)
    for (int j = 0; j < k; ++j) {
      auto& v = votes[cand[static_cast<std::size_t>(j)].second];
      v.first += 1;
      v.second += cand[static_cast<std::size_t>(j)].first;
    }
    int best = votes.begin()->first;
    auto best_vote = votes.begin()->second;
    for (const auto& [label, vote] : votes) {
      if (vote.first > best_vote.first || (vote.first == best_vote.first && vote.second < best_vote.second)) {
        best = label;
        best_vote = vote;
      }
    }
    out.predicted.push_back(best);
  }
  if (test_labels) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < out.predicted.size(); ++i) hits += out.predicted[i] == (*test_labels)[i];
    out.accuracy = out.predicted.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(out.predicted.size());
  }
  return out;
}

PlantedModel gen_planted_linear(Eigen::Index n, std::size_t m, Eigen::Index view_dim, int d, double noise_sd,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  PlantedModel p;
  p.X.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) p.X(i, j) = normal(rng);
  const double w_scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t v = 0; v < m; ++v) {
    Matrix W(view_dim, d);
    for (Eigen::Index i = 0; i < view_dim; ++i)
      for (Eigen::Index j = 0; j < d; ++j) W(i, j) = normal(rng) * w_scale;
    Matrix Z = p.X * W.transpose();
    if (noise_sd > 0.0)
      for (Eigen::Index i = 0; i < Z.rows(); ++i)
        for (Eigen::Index j = 0; j < Z.cols(); ++j) Z(i, j) += noise_sd * normal(rng);
    p.W.push_back(std::move(W));
    p.views.push_back(std::move(Z));
  }
  return p;
}

Matrix contaminate_entries(const Matrix& view, double rate, double magnitude, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 0.5)) throw Error(ErrorCode::InvalidArgument, "contamination rate must lie in [0, 0.5)");
  const double mean = view.mean();
  const double sd = std::sqrt((view.array() - mean).square().mean());
  const auto total = view.size();
  const auto count = static_cast<Eigen::Index>(std::llround(rate * static_cast<double>(total)));
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(total));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::bernoulli_distribution coin(0.5);
  Matrix out = view;
  for (Eigen::Index k = 0; k < count; ++k) {
    const double sign = coin(rng) ? 1.0 : -1.0;
    out(idx[static_cast<std::size_t>(k)]) += sign * magnitude * sd;
  }
  return out;
}

RobustnessReport robustness_benchmark(const std::vector<Matrix>& clean_views, double contamination_rate,
                                      double magnitude, const Hyperparams& hp, const FitOptions& options) {
  if (!(contamination_rate >= 0.0 && contamination_rate < 0.5))
    throw Error(ErrorCode::InvalidArgument, "contamination rate must lie in [0, 0.5)");
  std::vector<Matrix> views = clean_views;
  views.front() = contaminate_entries(views.front(), contamination_rate, magnitude, hp.seed);
  const MultiViewDataset data = validate_dataset(views);

  FitOptions cauchy_opts = options;
  cauchy_opts.loss = EstimatorKind::cauchy(hp.c);
  FitOptions l2_opts = options;
  l2_opts.loss = EstimatorKind::l2();

  const FitResult robust = fit(data, hp, std::nullopt, cauchy_opts);
  const FitResult ridge = fit(data, hp, std::nullopt, l2_opts);

  RobustnessReport r;
  r.contamination_rate = contamination_rate;
  r.cauchy_error = squared_reconstruction_error(clean_views, robust.model, robust.embedding.X);
  r.l2_error = squared_reconstruction_error(clean_views, ridge.model, ridge.embedding.X);
  r.ratio = r.l2_error > 0.0 ? r.cauchy_error / r.l2_error : (r.cauchy_error > 0.0 ? INFINITY : 1.0);
  return r;
}

}  // namespace intact
