#include "helpers.hpp"

#include "intact/core.hpp"
#include "intact/estimators.hpp"

#include <cmath>

using namespace intact;
using testing::check_throws_code;

TEST_CASE("validate_dataset bookkeeping and errors") {
  auto data = validate_dataset({Matrix::Zero(4, 2), Matrix::Ones(4, 2)});
  CHECK(data.n() == 4);
  CHECK(data.m() == 2);
  CHECK(data.view_dims() == std::vector<Eigen::Index>{2, 2});

  check_throws_code([] { validate_dataset({Matrix::Zero(4, 1), Matrix::Zero(5, 1)}); }, ErrorCode::ShapeMismatch);
  Matrix bad = Matrix::Zero(3, 1);
  bad(1, 0) = NAN;
  check_throws_code([&] { validate_dataset({bad}); }, ErrorCode::NonFiniteInput);
  check_throws_code([] { validate_dataset({Matrix(0, 0)}); }, ErrorCode::EmptyView);
  check_throws_code([] { validate_dataset({Matrix::Zero(3, 1)}, std::vector<int>{0, 1}); }, ErrorCode::ShapeMismatch);
}

TEST_CASE("standardize_views") {
  Matrix two(2, 1);
  two << 0, 2;
  Matrix constant(2, 1);
  constant << 5, 5;
  auto [out, rec] = standardize_views(validate_dataset({two, constant}));
  CHECK(out.views[0](0, 0) == doctest::Approx(-1.0));
  CHECK(out.views[0](1, 0) == doctest::Approx(1.0));
  CHECK(rec.mean[0](0) == doctest::Approx(1.0));
  CHECK(rec.scale[0](0) == doctest::Approx(1.0));
  CHECK(out.views[1].isZero());
  CHECK(rec.scale[1](0) == 1.0);

  // idempotent, and invert undoes apply
  auto [again, rec2] = standardize_views(out);
  CHECK((again.views[0] - out.views[0]).cwiseAbs().maxCoeff() < 1e-12);
  std::mt19937_64 rng(3);
  Matrix raw = testing::random_matrix(7, 3, rng, 4.0).array() + 2.0;
  auto [s, r] = standardize_views(validate_dataset({raw}));
  CHECK((r.invert(0, s.views[0]) - raw).cwiseAbs().maxCoeff() < 1e-12);
  check_throws_code([&] { r.apply(0, Matrix::Zero(2, 4)); }, ErrorCode::DimensionMismatch);
}

TEST_CASE("hyperparameter validation") {
  Hyperparams hp;
  CHECK_NOTHROW(hp.validate());
  hp.c = 0.0;
  check_throws_code([&] { hp.validate(); }, ErrorCode::NonPositiveScale);
  hp = {};
  hp.C2 = -1.0;
  check_throws_code([&] { hp.validate(); }, ErrorCode::InvalidArgument);
  hp = {};
  hp.d = 0;
  check_throws_code([&] { hp.validate(); }, ErrorCode::InvalidArgument);
}

TEST_CASE("cauchy rho, psi and weight") {
  CHECK(cauchy_rho(0.0, 1.0) == 0.0);
  CHECK(cauchy_rho(2.0, 2.0) == doctest::Approx(std::log(2.0)));
  CHECK(cauchy_rho(3.0, 1.0) == doctest::Approx(2.302585).epsilon(1e-6));
  CHECK(cauchy_psi(0.0, 1.0) == 0.0);
  CHECK(cauchy_psi(2.0, 2.0) == doctest::Approx(0.5));
  CHECK(cauchy_psi(1e6, 1.0) < 1e-5);
  CHECK(residual_weight(0.0, 1.0) == 1.0);
  CHECK(residual_weight(3.0, 1.0) == doctest::Approx(0.25));
  CHECK(residual_weight(1e12, 1.0) <= 1e-12);
  check_throws_code([] { residual_weight(-1.0, 1.0); }, ErrorCode::NegativeResidual);
  check_throws_code([] { cauchy_rho(1.0, 0.0); }, ErrorCode::NonPositiveScale);

  // psi is the derivative of rho: central differences
  for (double c : {0.5, 1.0, 3.0})
    for (double t : {-4.0, -0.3, 0.0, 0.7, 2.5}) {
      const double h = 1e-5;
      const double fd = (cauchy_rho(t + h, c) - cauchy_rho(t - h, c)) / (2 * h);
      CHECK(cauchy_psi(t, c) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("baseline estimators") {
  CHECK(baseline_rho(EstimatorKind::l2(), 2.0) == doctest::Approx(2.0));
  CHECK(baseline_rho(EstimatorKind::l1(1e-12), -3.0) == doctest::Approx(3.0));
  CHECK(baseline_rho(EstimatorKind::l1(1.0), 0.0) == 0.0);
  CHECK(baseline_rho(EstimatorKind::cauchy(1.0), 1.0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("squared-residual weights are loss derivatives") {
  for (const auto kind : {EstimatorKind::cauchy(1.3), EstimatorKind::l2(), EstimatorKind::l1(0.1)})
    for (double u : {0.0, 0.2, 1.0, 9.0}) {
      const double h = 1e-6;
      const double lo = u > h ? loss_of_sq(kind, u - h) : loss_of_sq(kind, u);
      const double fd = (loss_of_sq(kind, u + h) - lo) / (u > h ? 2 * h : h);
      CHECK(weight_of_sq(kind, u) == doctest::Approx(fd).epsilon(1e-4));
    }
}
