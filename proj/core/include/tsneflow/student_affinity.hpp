#pragma once

#include <cstddef>

#include "tsneflow/embedding.hpp"
#include "tsneflow/matrix.hpp"

namespace tsneflow {

/// Heavy-tailed kernel w_ij = (1 + |y_i - y_j|^2)^-1 and its normaliser Z
/// summed over ordered pairs, so that q_ij = w_ij / Z. Coincident points are
/// allowed (w = 1).
struct StudentKernel {
  Matrix w;       // symmetric, zero diagonal
  double z = 0.0; // Σ_{k≠l} w_kl

  static StudentKernel compute(const EmbeddingState& state);

  double q(std::size_t i, std::size_t j) const noexcept { return w(i, j) / z; }
};

/// q_ij over ordered pairs; Σ_{i≠j} q_ij = 1.
Matrix q_matrix(const EmbeddingState& state);

/// Tail approximation q'_ij = |y_i-y_j|^-2 / Σ_{k≠l} |y_k-y_l|^-2.
/// Throws CoincidentPoints if two points share a position. When every
/// distance exceeds 1, q'/2 <= q <= 2 q' element-wise.
Matrix q_prime_matrix(const EmbeddingState& state);

struct QPrimeSquareCheck {
  double value = 0.0;   // Σ_{i≠j} q'_ij^2
  double bound = 0.0;   // 1 / (4 n (log n)^2)
  double margin = 0.0;  // value - bound
  bool asserted = false;
};

/// Lower bound on Σ q'^2 for any n distinct points in the plane. Asserted for
/// n >= 3 (throws BoundViolated); for n = 2 the numbers are only reported.
QPrimeSquareCheck qprime_sq_sum_check(const EmbeddingState& state);

}  // namespace tsneflow
