#pragma once

#include "intact/types.hpp"

#include <doctest.h>

#include <random>
#include <vector>

namespace testing {

inline intact::Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  intact::Matrix a(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) a(i, j) = g(rng);
  return a;
}

inline intact::Vector random_vector(Eigen::Index r, std::mt19937_64& rng, double sd = 1.0) {
  return random_matrix(r, 1, rng, sd).col(0);
}

template <class F>
void check_throws_code(F&& f, intact::ErrorCode code) {
  try {
    f();
    FAIL("expected an error");
  } catch (const intact::Error& e) {
    CHECK(e.code() == code);
  }
}

}  // namespace testing
