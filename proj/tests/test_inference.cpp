#include "helpers.hpp"

#include "intact/core.hpp"
#include "intact/eval.hpp"
#include "intact/inference.hpp"
#include "intact/irr.hpp"

#include <cmath>

using namespace intact;
using testing::check_throws_code;
using testing::random_matrix;

namespace {

IntactModel linear_model(std::vector<Matrix> W, double c, double C2) {
  IntactModel m;
  m.W = std::move(W);
  m.hyperparams.d = static_cast<int>(m.W.front().cols());
  m.hyperparams.c = c;
  m.hyperparams.C2 = C2;
  return m;
}

}  // namespace

TEST_CASE("embed_example: planted point, zero input, idempotence") {
  std::mt19937_64 rng(7);
  auto model = linear_model({random_matrix(4, 3, rng), random_matrix(5, 3, rng)}, 1.0, 0.0);
  const Vector x_star = testing::random_vector(3, rng);
  const std::vector<Vector> z{model.W[0] * x_star, model.W[1] * x_star};
  CHECK((embed_example(z, model, model.hyperparams) - x_star).norm() < 1e-6);

  model.hyperparams.C2 = 0.05;
  const std::vector<Vector> zero{Vector::Zero(4), Vector::Zero(5)};
  CHECK(embed_example(zero, model, model.hyperparams) == Vector::Zero(3));

  const std::vector<Vector> noisy{testing::random_vector(4, rng), testing::random_vector(5, rng)};
  const Vector x = embed_example(noisy, model, model.hyperparams);
  const std::vector<Vector> recon{model.W[0] * x, model.W[1] * x};
  const Vector x2 = embed_example(recon, model, model.hyperparams);
  // the reconstruction pulls toward x, and the ridge shrinks it; with small C2 both stay close
  CHECK((x2 - x).norm() < 0.2 * x.norm() + 1e-9);

  const std::vector<Vector> wrong{Vector::Zero(3), Vector::Zero(5)};
  check_throws_code([&] { embed_example(wrong, model, model.hyperparams); }, ErrorCode::ShapeMismatch);
}

TEST_CASE("embedding training examples reproduces the fit") {
  const auto planted = gen_planted_linear(60, 3, 4, 2, 0.1, 1);
  const auto data = validate_dataset(planted.views);
  Hyperparams hp;
  hp.d = 2;
  hp.C2 = 1e-3;
  const auto r = fit(data, hp);
  const Matrix X = embed_views(data.views, r.model, hp, 1);
  CHECK((X - r.embedding.X).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(embed_views(data.views, r.model, hp, 3) == X);
}

TEST_CASE("stability bound values") {
  auto model = linear_model({Matrix::Identity(1, 1)}, 1.0, 1.0);
  CHECK(spectral_norms(model).front() == doctest::Approx(1.0));
  CHECK(stability_bound(0.0, model, model.hyperparams) == 0.0);
  CHECK(stability_bound(1.0, model, model.hyperparams) == doctest::Approx(4.77780).epsilon(1e-5));
  for (double tau = 1e-6; tau < 10.0; tau *= 3.0)
    CHECK(stability_bound(tau, model, model.hyperparams) / stability_bound(4 * tau, model, model.hyperparams) >= 0.25);
  model.hyperparams.C2 = 0.0;
  check_throws_code([&] { stability_bound(1.0, model, model.hyperparams); }, ErrorCode::ZeroRegularizer);
}

TEST_CASE("stability probe") {
  std::mt19937_64 rng(8);
  auto model = linear_model({random_matrix(3, 2, rng), random_matrix(3, 2, rng)}, 1.0, 0.1);
  const std::vector<Vector> z{testing::random_vector(3, rng), testing::random_vector(3, rng)};
  const auto zero = stability_probe(z, model, model.hyperparams, 0.0, 0, 1);
  CHECK(zero.measured_deviation == 0.0);
  CHECK(zero.holds);
  for (double tau : {1e-3, 1e-2}) {
    const auto r = stability_probe(z, model, model.hyperparams, tau, 1, 2);
    CHECK(r.holds);
    CHECK(r.measured_deviation <= r.beta_bound);
  }
  check_throws_code([&] { stability_probe(z, model, model.hyperparams, 1e-3, 2, 0); }, ErrorCode::IndexOutOfRange);
  check_throws_code([&] { stability_probe(z, model, model.hyperparams, 1e-3, 0, 3); }, ErrorCode::IndexOutOfRange);

  // mirror-symmetric instance: +tau and -tau move the loss identically
  auto sym = linear_model({Matrix::Identity(2, 2), Matrix::Identity(2, 2)}, 1.0, 0.1);
  const std::vector<Vector> zs{Vector::Zero(2), Vector::Zero(2)};
  const auto plus = stability_probe(zs, sym, sym.hyperparams, 0.05, 0, 0);
  const auto minus = stability_probe(zs, sym, sym.hyperparams, -0.05, 0, 0);
  CHECK(plus.measured_deviation == doctest::Approx(minus.measured_deviation).epsilon(1e-8));
}
