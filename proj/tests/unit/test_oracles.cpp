#include <doctest.h>

#include <cmath>
#include <random>

#include "tsneflow_checks/oracles.hpp"

using namespace tsneflow;
using namespace tsneflow::checks;
using doctest::Approx;

TEST_CASE("finite-difference weights are exact on quartics") {
  auto f = [](double t) { return 3.0 - 2.0 * t + 0.5 * t * t - t * t * t + 0.25 * t * t * t * t; };
  auto df = [](double t) { return -2.0 + t - 3.0 * t * t + t * t * t; };
  std::vector<double> even, uneven;
  for (int k = 0; k < 9; ++k) {
    even.push_back(0.1 * k);
    uneven.push_back(0.1 * k + 0.03 * std::sin(3.0 * k));
  }
  for (const auto* ts : {&even, &uneven}) {
    std::vector<double> v;
    for (double t : *ts) v.push_back(f(t));
    for (std::size_t k = 0; k < ts->size(); ++k) {
      CHECK(fd_derivative(*ts, v, k) == Approx(df((*ts)[k])).epsilon(1e-9));
    }
  }
}

TEST_CASE("random joint affinity is a valid distribution") {
  std::mt19937_64 rng(1);
  for (std::size_t n : {2u, 3u, 17u}) {
    const auto p = random_joint_affinity(n, rng);
    long double mass = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        mass += p(i, j);
        CHECK(p(i, j) == p(j, i));
        if (i != j) CHECK(p(i, j) > 0.0);
      }
    CHECK(std::abs(static_cast<double>(mass) - 1.0) <= 1e-14);
  }
}

TEST_CASE("reference helpers on hand examples") {
  const std::vector<Point2> y{{0, 0}, {1, 0}, {3, 0}};
  CHECK(pair_sq_sum_reference(y) == Approx(2.0 * (1 + 9 + 4)));
  const double s2 = 2.0 * (1.0 + 1.0 / 9 + 1.0 / 4);
  const double s4 = 2.0 * (1.0 + 1.0 / 81 + 1.0 / 16);
  CHECK(qprime_sq_sum_reference(y) == Approx(s4 / (s2 * s2)));
  const std::vector<double> row{0.25, 0.25, 0.5, 0.0};
  CHECK(entropy_reference(row) == Approx(1.5 * std::log(2.0)));
}
