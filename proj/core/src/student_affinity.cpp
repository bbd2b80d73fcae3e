#include "tsneflow/student_affinity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tsneflow/error.hpp"

namespace tsneflow {

namespace {

constexpr const char* kModule = "affinity-lo";

// Squared distances divided by the smallest one, so inverse powers stay finite
// for any configuration scale.
Matrix relative_sq_distances(const EmbeddingState& state) {
  const std::size_t n = state.size();
  Matrix d2(n, n);
  double smallest = std::numeric_limits<double>::infinity();
  std::size_t wi = 0, wj = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = norm_sq(state.y[i] - state.y[j]);
      d2(i, j) = d2(j, i) = v;
      if (v < smallest) {
        smallest = v;
        wi = i;
        wj = j;
      }
    }
  }
  if (!(smallest > 0.0)) {
    throw Error(Errc::kCoincidentPoints, kModule, "two embedded points coincide", wi, wj);
  }
  for (auto& v : d2.data()) v /= smallest;
  return d2;
}

}  // namespace

StudentKernel StudentKernel::compute(const EmbeddingState& state) {
  const std::size_t n = state.size();
  StudentKernel k{Matrix(n, n), 0.0};
  double half = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = 1.0 / (1.0 + norm_sq(state.y[i] - state.y[j]));
      k.w(i, j) = k.w(j, i) = w;
      half += w;
    }
  }
  k.z = 2.0 * half;
  return k;
}

Matrix q_matrix(const EmbeddingState& state) {
  if (state.size() < 2) {
    throw Error(Errc::kInvalidArgument, kModule, "need at least 2 points");
  }
  auto k = StudentKernel::compute(state);
  for (auto& v : k.w.data()) v /= k.z;
  return std::move(k.w);
}

Matrix q_prime_matrix(const EmbeddingState& state) {
  const std::size_t n = state.size();
  if (n < 2) {
    throw Error(Errc::kInvalidArgument, kModule, "need at least 2 points");
  }
  Matrix q = relative_sq_distances(state);
  double half = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 1.0 / q(i, j);
      q(i, j) = q(j, i) = v;
      half += v;
    }
  }
  const double total = 2.0 * half;
  for (auto& v : q.data()) v /= total;
  return q;
}

QPrimeSquareCheck qprime_sq_sum_check(const EmbeddingState& state) {
  const std::size_t n = state.size();
  const Matrix r = relative_sq_distances(state);
  double inv2 = 0.0;
  double inv4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 1.0 / r(i, j);
      inv2 += v;
      inv4 += v * v;
    }
  }
  // Ordered pairs: numerator doubles, denominator quadruples.
  QPrimeSquareCheck out;
  out.value = (2.0 * inv4) / (4.0 * inv2 * inv2);
  const double log_n = std::log(static_cast<double>(n));
  out.bound = 1.0 / (4.0 * static_cast<double>(n) * log_n * log_n);
  out.margin = out.value - out.bound;
  out.asserted = n >= 3;
  if (out.asserted && out.value < out.bound) {
    throw Error(Errc::kBoundViolated, kModule, "sum of squared tail affinities below its bound");
  }
  return out;
}

}  // namespace tsneflow
