#include "helpers.hpp"

#include "intact/core.hpp"
#include "intact/eval.hpp"
#include "intact/inference.hpp"
#include "intact/irr.hpp"
#include "intact/kernel.hpp"

#include <cmath>

using namespace intact;
using testing::check_throws_code;
using testing::random_matrix;

TEST_CASE("gram examples") {
  const Matrix I = Matrix::Identity(2, 2);
  CHECK(gram(I, KernelSpec::linear()) == I);
  std::mt19937_64 rng(1);
  const Matrix z = random_matrix(6, 3, rng);
  const Matrix K = gram(z, KernelSpec::rbf(0.7));
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(K(i, i) == 1.0);
  CHECK(K == K.transpose());
  Matrix pts(2, 1);
  pts << 0.0, 1.0;
  CHECK(gram(pts, KernelSpec::rbf(1.0))(0, 1) == doctest::Approx(std::exp(-1.0)));
  check_throws_code([&] { gram(pts, KernelSpec::rbf(-1.0)); }, ErrorCode::InvalidArgument);
}

TEST_CASE("enforce_psd") {
  Matrix K = Matrix::Identity(2, 2);
  CHECK(enforce_psd(K) == K);
  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;  // eigenvalue -1
  check_throws_code([&] { enforce_psd(bad); }, ErrorCode::GramNotPSD);
  Matrix tiny(2, 2);
  tiny << 1, 1 + 1e-6, 1 + 1e-6, 1;  // eigenvalue about -1e-6
  const Matrix fixed = enforce_psd(tiny);
  CHECK(fixed(0, 0) > 1.0);
  CHECK(fixed(0, 1) == tiny(0, 1));
}

TEST_CASE("kernel residuals and norms against explicit features") {
  std::mt19937_64 rng(2);
  const Matrix z = random_matrix(8, 3, rng);
  const std::vector<Matrix> views{z};
  KernelModel km = make_kernel_model(views, KernelSpec::rbf(0.5), 2);
  CHECK(kernel_residual_sq(3, 0, Vector::Zero(2), km) == doctest::Approx(1.0));
  CHECK(kernel_w_norm_sq(0, km) == 0.0);
  check_throws_code([&] { kernel_residual_sq(8, 0, Vector::Zero(2), km); }, ErrorCode::IndexOutOfRange);
  check_throws_code([&] { kernel_residual_sq(0, 1, Vector::Zero(2), km); }, ErrorCode::IndexOutOfRange);

  KernelModel lin = make_kernel_model(views, KernelSpec::linear(), 2);
  CHECK(kernel_residual_sq(4, 0, Vector::Constant(2, 0.3), lin) == doctest::Approx(z.row(4).squaredNorm()));
  lin.atoms[0] = random_matrix(8, 2, rng);
  const Matrix W = z.transpose() * lin.atoms[0];  // explicit map
  CHECK(kernel_w_norm_sq(0, lin) == doctest::Approx(W.squaredNorm()).epsilon(1e-8));
  const Vector x = testing::random_vector(2, rng);
  for (Eigen::Index i = 0; i < 8; ++i)
    CHECK(kernel_residual_sq(i, 0, x, lin) ==
          doctest::Approx((z.row(i).transpose() - W * x).squaredNorm()).epsilon(1e-10));
}

TEST_CASE("median heuristic") {
  Matrix pts(3, 1);
  pts << 0.0, 1.0, 3.0;  // squared distances 1, 4, 9
  CHECK(median_heuristic_gamma(pts) == doctest::Approx(0.25));
  CHECK(median_heuristic_gamma(Matrix::Zero(3, 2)) == 1.0);
  CHECK(resolve_kernel(pts, KernelSpec::rbf(0.0)).gamma == doctest::Approx(0.25));
}

TEST_CASE("linear-kernel fit mirrors the linear fit") {
  std::mt19937_64 rng(3);
  const auto data = validate_dataset({random_matrix(20, 3, rng), random_matrix(20, 4, rng)});
  Hyperparams hp;
  hp.d = 2;
  hp.C2 = 1e-2;
  hp.max_outer = 50;
  const auto lin = fit(data, hp);
  const auto ker = kernel_fit(data, hp, KernelSpec::linear());
  CHECK(align_to_truth(ker.embedding.X, lin.embedding.X).relative_residual < 1e-4);

  const IntactModel& km = ker.model;
  for (Eigen::Index i : {0, 7, 19}) {
    const auto z = data.example(i);
    CHECK((kernel_embed(z, km, hp) - ker.embedding.X.row(i).transpose()).norm() < 1e-4);
    CHECK((embed_example(z, km, hp) - embed_example(z, lin.model, hp)).norm() < 1e-6);
  }
}

TEST_CASE("rbf kernel fit descends and embeds its own examples") {
  std::mt19937_64 rng(4);
  const auto data = validate_dataset({random_matrix(25, 2, rng), random_matrix(25, 3, rng)});
  Hyperparams hp;
  hp.d = 2;
  hp.C2 = 1e-3;
  hp.max_outer = 100;
  const auto r = kernel_fit(data, hp, KernelSpec::rbf(0.0));
  CHECK(r.history.monotone());
  CHECK(r.model.kernel_part->kernels[0].gamma > 0.0);
  for (Eigen::Index i : {0, 12, 24})
    CHECK((kernel_embed(data.example(i), r.model, hp) - r.embedding.X.row(i).transpose()).norm() < 1e-4);
}
