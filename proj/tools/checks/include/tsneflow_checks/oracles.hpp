#pragma once

// Reference computations written independently of the core library. They
// favour plainness over speed and use long double accumulators.

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "tsneflow/dataset.hpp"
#include "tsneflow/embedding.hpp"
#include "tsneflow/matrix.hpp"

namespace tsneflow::checks {

long double kl_reference(const Matrix& p, const std::vector<Point2>& y);

/// Naive gradient 4 Σ (p - q)(y_i - y_j) / (1 + d^2), one row at a time.
std::vector<Point2> gradient_reference(const Matrix& p, const std::vector<Point2>& y);

/// Central differences of kl_reference, per coordinate.
std::vector<Point2> gradient_fd(const Matrix& p, const std::vector<Point2>& y, double h);

/// Σ_{i≠j} |y_i - y_j|^2 by the double loop.
double pair_sq_sum_reference(const std::vector<Point2>& y);

/// d/dt of S along y' = -grad, by the chain rule on the naive gradient.
double pair_sq_sum_rate_reference(const Matrix& p, const std::vector<Point2>& y);

/// First derivative at t[k] from the values at up to 5 nearby (possibly
/// unevenly spaced) nodes, by Fornberg's weights.
double fd_derivative(std::span<const double> t, std::span<const double> v, std::size_t k);

double entropy_reference(std::span<const double> row);

/// log p_{j|i} for all j (entry i is -inf), straight from the data.
std::vector<double> log_cond_row_reference(const Dataset& data, std::size_t i, double sigma);

double qprime_sq_sum_reference(const std::vector<Point2>& y);

/// Minimum over all permutations; n <= 8.
double w1_brute_force(const Dataset& a, const Dataset& b);

/// Random symmetric, zero-diagonal, unit-mass matrix with entries spread over
/// a few orders of magnitude.
Matrix random_joint_affinity(std::size_t n, std::mt19937_64& rng);

enum class ConfigShape { kGaussian, kLine, kMultiscale };
std::vector<Point2> random_configuration(std::size_t n, ConfigShape shape, std::mt19937_64& rng);

/// max_i |a_i - b_i| / max_i |b_i| over both coordinates.
double relative_max_error(const std::vector<Point2>& a, const std::vector<Point2>& b);

}  // namespace tsneflow::checks
