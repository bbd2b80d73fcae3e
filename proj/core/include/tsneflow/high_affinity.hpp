#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tsneflow/dataset.hpp"
#include "tsneflow/matrix.hpp"

namespace tsneflow {

/// Row-stochastic Gaussian affinities p_{j|i}. The diagonal is stored as 0.
/// Entries far outside the bandwidth may underflow to exactly 0.
struct CondAffinity {
  Matrix rows;
  std::vector<double> sigmas;
  double perp_target = 0.0;

  std::size_t size() const noexcept { return rows.rows(); }
};

/// Joint affinity p_ij over ordered pairs: symmetric, zero diagonal, total
/// mass one.
class SymAffinity {
 public:
  static constexpr double kMassTolerance = 1e-12;

  /// Validates symmetry, non-negativity and unit mass.
  static SymAffinity from_matrix(Matrix p);

  std::size_t size() const noexcept { return p_.rows(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return p_(i, j); }
  const Matrix& matrix() const noexcept { return p_; }

  /// Σ_{i≠j} p_ij log p_ij (non-positive; zero entries contribute 0).
  double entropy_term() const noexcept { return entropy_term_; }
  double min_entry() const noexcept { return min_entry_; }
  double sum_squares() const noexcept { return sum_squares_; }

 private:
  explicit SymAffinity(Matrix p);

  Matrix p_;
  double entropy_term_ = 0.0;
  double min_entry_ = 0.0;
  double sum_squares_ = 0.0;
};

/// p_{.|i} for bandwidth sigma, length n with entry i = 0. Uses a max-shifted
/// exponent so no sigma overflows or yields 0/0.
std::vector<double> conditional_row(const Dataset& data, std::size_t i, double sigma);

/// -Σ p log p in nats, with 0 log 0 = 0.
double shannon_entropy(std::span<const double> row);

/// Number of points tied for nearest neighbour of x_i (tolerance 1e-12 * diameter).
std::size_t nearest_tie_count(const Dataset& data, std::size_t i);

double median_pairwise_distance(const Dataset& data);

/// Perplexity ζ(n-1) that keeps the bandwidths stable as n grows.
double perplexity_from_zeta(std::size_t n, double zeta);

/// Finds the unique sigma with exp(H(P_i)) = perp up to relative tolerance
/// `tol`: bracket by doubling/halving from `initial_sigma` (default: median
/// pairwise distance), then bisect.
///
/// Throws PerpOutOfRange when perp is outside (max(1, N_i), n-1),
/// DegenerateDistances when all distances from x_i coincide, and
/// BracketFailure if 200 expansions or 128 bisections do not converge.
double solve_sigma(const Dataset& data, std::size_t i, double perp, double tol = 1e-9,
                   std::optional<double> initial_sigma = std::nullopt);

/// Calibrates every row. Errors carry the offending index.
CondAffinity calibrate(const Dataset& data, double perp, double tol = 1e-9);

/// Element-wise (p_{j|i} + p_{i|j}) / (2n) on a raw conditional matrix.
Matrix symmetrize_rows(const Matrix& cond_rows);

SymAffinity symmetrize(const CondAffinity& cond);

/// Affinity comparability report for a calibrated dataset.
///
/// With C_p = exp(diam^2 / (2 sigma_floor^2)) every conditional affinity
/// satisfies C_p^-1 <= (n-1) p_{j|i} <= C_p and every joint affinity
/// C_p^-1 <= n(n-1) p_ij <= C_p. Everything is evaluated in log space from
/// the data so underflowed entries are still checked exactly.
struct AffinityBoundReport {
  double sigma_floor = 0.0;
  double log_cp = 0.0;
  double cp = 1.0;
  double log_min_scaled_cond = 0.0;  // min log((n-1) p_{j|i})
  double log_max_scaled_cond = 0.0;
  double log_min_scaled_joint = 0.0;  // min log(n(n-1) p_ij)
  double log_max_scaled_joint = 0.0;
  double min_scaled_cond = 1.0;
  double max_scaled_cond = 1.0;
  /// log_cp minus the largest |log scaled affinity|; non-negative when the bounds hold.
  double margin = 0.0;
  std::size_t entries_checked = 0;
};

/// Throws BoundViolated with the witness pair if any entry escapes the bounds.
AffinityBoundReport cp_bound_report(const CondAffinity& cond, const Dataset& data,
                                    double sigma_floor);
AffinityBoundReport cp_bound_report(const CondAffinity& cond, const Dataset& data);

}  // namespace tsneflow
