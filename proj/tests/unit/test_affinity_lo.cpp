#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "tsneflow/student_affinity.hpp"
#include "tsneflow_checks/oracles.hpp"

using namespace tsneflow;
using doctest::Approx;

namespace {

EmbeddingState transformed(const EmbeddingState& s, double angle, Point2 shift, double scale) {
  EmbeddingState out = s;
  const double c = std::cos(angle), sn = std::sin(angle);
  for (auto& p : out.y) p = scale * Point2{c * p.x - sn * p.y, sn * p.x + c * p.y} + shift;
  return out;
}

}  // namespace

TEST_CASE("q over ordered pairs") {
  for (auto s : {th::state({{0, 0}, {3, 4}}), th::state({{1, 1}, {1, 1}})}) {
    const auto q = q_matrix(s);
    CHECK(q(0, 1) == Approx(0.5));
    CHECK(q(1, 0) == Approx(0.5));
    CHECK(q(0, 0) == 0.0);
  }
  const double h = std::sqrt(3.0) / 2.0;
  const auto eq = q_matrix(th::state({{0, 0}, {1, 0}, {0.5, h}}));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(eq(i, j) == Approx(1.0 / 6.0).epsilon(1e-14));

  // (0,0), (1,0), (3,0): kernels 1/2, 1/10, 1/5 for pairs 01, 02, 12.
  const auto q = q_matrix(th::state({{0, 0}, {1, 0}, {3, 0}}));
  const double z = 2.0 * (0.5 + 0.1 + 0.2);
  CHECK(q(0, 1) == Approx(0.5 / z).epsilon(1e-15));
  CHECK(q(0, 2) == Approx(0.1 / z).epsilon(1e-15));
  CHECK(q(2, 1) == Approx(0.2 / z).epsilon(1e-15));

  CHECK(th::code_of([] { q_matrix(th::state({{0, 0}})); }) == Errc::kInvalidArgument);
}

TEST_CASE("q sums to one, symmetric, isometry invariant") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const EmbeddingState s{checks::random_configuration(3 + k, checks::ConfigShape::kGaussian, rng),
                           0.0};
    const auto q = q_matrix(s);
    const auto moved = q_matrix(transformed(s, 0.3 * k, {2.0, -7.0}, 1.0));
    double mass = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j) {
        mass += q(i, j);
        CHECK(q(i, j) == q(j, i));
        CHECK(moved(i, j) == Approx(q(i, j)).epsilon(1e-9));
      }
    CHECK(mass == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("tail approximation q'") {
  const auto two = q_prime_matrix(th::state({{0, 0}, {0, 2}}));
  CHECK(two(0, 1) == Approx(0.5));

  std::mt19937_64 rng(8);
  const EmbeddingState s{checks::random_configuration(10, checks::ConfigShape::kGaussian, rng), 0.0};
  const auto base = q_prime_matrix(s);
  const auto moved = q_prime_matrix(transformed(s, 1.1, {5.0, 3.0}, 17.0));
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) CHECK(moved(i, j) == Approx(base(i, j)).epsilon(1e-9));

  try {
    q_prime_matrix(th::state({{0, 0}, {1, 1}, {0, 0}}));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kCoincidentPoints);
    CHECK(e.index() == 0u);
    CHECK(e.index2() == 2u);
  }
}

TEST_CASE("q' sandwich once all distances exceed 1") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    // 10 points on a jittered grid with spacing 3.
    EmbeddingState s;
    for (int i = 0; i < 10; ++i) s.y.push_back({3.0 * (i % 4) + 0.5 * u(rng), 3.0 * (i / 4) + 0.5 * u(rng)});
    const auto q = q_matrix(s);
    const auto qp = q_prime_matrix(s);
    for (std::size_t i = 0; i < 10; ++i)
      for (std::size_t j = 0; j < 10; ++j) {
        if (i == j) continue;
        CHECK(0.5 * qp(i, j) <= q(i, j));
        CHECK(q(i, j) <= 2.0 * qp(i, j));
      }
  }
}

TEST_CASE("square-sum lower bound") {
  const double h = std::sqrt(3.0) / 2.0;
  const auto eq = qprime_sq_sum_check(th::state({{0, 0}, {1, 0}, {0.5, h}}));
  CHECK(eq.value == Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(eq.bound == Approx(1.0 / (12.0 * std::log(3.0) * std::log(3.0))));
  CHECK(eq.bound == Approx(0.069).epsilon(0.01));
  CHECK(eq.asserted);
  CHECK(eq.margin == Approx(eq.value - eq.bound));

  const auto two = qprime_sq_sum_check(th::state({{0, 0}, {1, 0}}));
  CHECK_FALSE(two.asserted);
  CHECK(two.value == Approx(0.5));

  std::mt19937_64 rng(21);
  for (int k = 0; k < 30; ++k) {
    const EmbeddingState s{
        checks::random_configuration(3 + k, static_cast<checks::ConfigShape>(k % 3), rng), 0.0};
    const auto a = qprime_sq_sum_check(s);
    const auto b = qprime_sq_sum_check(transformed(s, 0.7, {-4.0, 9.0}, 0.01));
    CHECK(a.value >= a.bound);
    CHECK(b.value == Approx(a.value).epsilon(1e-9));
    CHECK(a.value == Approx(checks::qprime_sq_sum_reference(s.y)).epsilon(1e-12));
  }
}
