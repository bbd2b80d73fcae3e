#include "tsneflow/high_affinity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tsneflow/error.hpp"

namespace tsneflow {

namespace {

constexpr const char* kModule = "affinity-hi";
constexpr double kTieTolerance = 1e-12;
constexpr int kMaxExpansions = 200;
constexpr int kMaxBisections = 128;

std::vector<double> sq_distance_row(const Dataset& data, std::size_t i) {
  std::vector<double> sq(data.size(), 0.0);
  for (std::size_t j = 0; j < data.size(); ++j) {
    if (j != i) sq[j] = data.sq_distance(i, j);
  }
  return sq;
}

double min_off(std::span<const double> sq, std::size_t self) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < sq.size(); ++j) {
    if (j != self) m = std::min(m, sq[j]);
  }
  return m;
}

// Fills `out` with p_{.|self} and returns its entropy. The exponent is shifted
// by the nearest squared distance, so the largest term is exactly 1 and the
// normaliser lies in [1, n-1].
double fill_row(std::span<const double> sq, std::size_t self, double sigma, double sq_min,
                std::span<double> out) {
  const double s = 1.0 / (2.0 * sigma * sigma);
  double z = 0.0;
  double weighted = 0.0;
  for (std::size_t j = 0; j < sq.size(); ++j) {
    if (j == self) {
      out[j] = 0.0;
      continue;
    }
    // s may overflow to inf for tiny sigma; keep 0 * inf out of both sums.
    const double diff = sq[j] - sq_min;
    const double excess = diff == 0.0 ? 0.0 : diff * s;
    const double e = std::exp(-excess);
    out[j] = e;
    z += e;
    if (e > 0.0) weighted += e * excess;
  }
  for (std::size_t j = 0; j < sq.size(); ++j) out[j] /= z;
  return std::log(z) + weighted / z;
}

double log_sum_exp(std::span<const double> a) {
  const double m = *std::max_element(a.begin(), a.end());
  double acc = 0.0;
  for (double v : a) acc += std::exp(v - m);
  return m + std::log(acc);
}

}  // namespace

SymAffinity::SymAffinity(Matrix p) : p_(std::move(p)) {
  const std::size_t n = p_.rows();
  double ent = 0.0;
  double sq = 0.0;
  double mn = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double v = p_(i, j);
      if (v > 0.0) ent += v * std::log(v);
      sq += v * v;
      mn = std::min(mn, v);
    }
  }
  entropy_term_ = ent;
  sum_squares_ = sq;
  min_entry_ = mn;
}

SymAffinity SymAffinity::from_matrix(Matrix p) {
  const std::size_t n = p.rows();
  if (n < 2 || p.cols() != n) {
    throw Error(Errc::kInvalidArgument, kModule, "joint affinity must be square with n >= 2");
  }
  long double mass = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = p(i, j);
      if (i == j) {
        if (v != 0.0) {
          throw Error(Errc::kInvalidArgument, kModule, "joint affinity diagonal must be empty", i);
        }
        continue;
      }
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(Errc::kNonFiniteInput, kModule, "joint affinity entry not a probability", i, j);
      }
      if (v != p(j, i)) {
        throw Error(Errc::kInvalidArgument, kModule, "joint affinity not symmetric", i, j);
      }
      mass += v;
    }
  }
  if (std::fabs(static_cast<double>(mass) - 1.0) > kMassTolerance) {
    throw Error(Errc::kInvalidArgument, kModule,
                "joint affinity mass " + std::to_string(static_cast<double>(mass)) + " != 1");
  }
  return SymAffinity(std::move(p));
}

std::vector<double> conditional_row(const Dataset& data, std::size_t i, double sigma) {
  if (i >= data.size()) {
    throw Error(Errc::kInvalidArgument, kModule, "row index out of range", i);
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(Errc::kInvalidArgument, kModule, "sigma must be positive and finite", i);
  }
  const auto sq = sq_distance_row(data, i);
  std::vector<double> row(data.size());
  fill_row(sq, i, sigma, min_off(sq, i), row);
  return row;
}

double shannon_entropy(std::span<const double> row) {
  double h = 0.0;
  for (double p : row) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::size_t nearest_tie_count(const Dataset& data, std::size_t i) {
  const auto sq = sq_distance_row(data, i);
  const double nearest = std::sqrt(min_off(sq, i));
  const double tol = kTieTolerance * data.diameter();
  std::size_t count = 0;
  for (std::size_t j = 0; j < sq.size(); ++j) {
    if (j != i && std::sqrt(sq[j]) - nearest <= tol) ++count;
  }
  return count;
}

double median_pairwise_distance(const Dataset& data) {
  const std::size_t n = data.size();
  std::vector<double> d;
  d.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d.push_back(data.sq_distance(i, j));
  }
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return std::sqrt(*mid);
}

double perplexity_from_zeta(std::size_t n, double zeta) {
  if (!(zeta > 0.0 && zeta < 1.0)) {
    throw Error(Errc::kPerpOutOfRange, kModule, "zeta must lie in (0, 1)");
  }
  return zeta * static_cast<double>(n - 1);
}

double solve_sigma(const Dataset& data, std::size_t i, double perp, double tol,
                   std::optional<double> initial_sigma) {
  const std::size_t n = data.size();
  if (i >= n) {
    throw Error(Errc::kInvalidArgument, kModule, "row index out of range", i);
  }
  if (!(tol > 0.0)) {
    throw Error(Errc::kInvalidArgument, kModule, "tolerance must be positive", i);
  }
  const double upper = static_cast<double>(n - 1);
  if (!(perp > 1.0 && perp < upper)) {
    throw Error(Errc::kPerpOutOfRange, kModule,
                "perplexity " + std::to_string(perp) + " outside (1, " + std::to_string(upper) +
                    ")",
                i);
  }

  const auto sq = sq_distance_row(data, i);
  const double sq_min = min_off(sq, i);
  double sq_max = 0.0;
  for (std::size_t j = 0; j < n; ++j) sq_max = std::max(sq_max, sq[j]);
  const double tie_tol = kTieTolerance * data.diameter();
  if (std::sqrt(sq_max) - std::sqrt(sq_min) <= tie_tol) {
    throw Error(Errc::kDegenerateDistances, kModule,
                "all distances from the point are equal; entropy does not depend on sigma", i);
  }
  const std::size_t ties = nearest_tie_count(data, i);
  if (perp <= static_cast<double>(ties)) {
    throw Error(Errc::kPerpOutOfRange, kModule,
                "perplexity " + std::to_string(perp) + " not above the nearest-tie count " +
                    std::to_string(ties),
                i);
  }

  std::vector<double> row(n);
  const double target = std::log(perp);
  auto entropy_at = [&](double sigma) { return fill_row(sq, i, sigma, sq_min, row); };
  auto converged = [&](double h) { return std::fabs(std::exp(h) - perp) / perp <= tol; };

  double sigma = initial_sigma ? *initial_sigma : median_pairwise_distance(data);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(Errc::kInvalidArgument, kModule, "initial sigma must be positive", i);
  }
  double h = entropy_at(sigma);
  if (converged(h)) return sigma;

  double lo = sigma;
  double hi = sigma;
  int expansions = 0;
  if (h < target) {
    while (h < target) {
      if (++expansions > kMaxExpansions) {
        throw Error(Errc::kBracketFailure, kModule, "could not bracket sigma from above", i);
      }
      lo = hi;
      hi *= 2.0;
      h = entropy_at(hi);
      if (converged(h)) return hi;
    }
  } else {
    while (h > target) {
      if (++expansions > kMaxExpansions) {
        throw Error(Errc::kBracketFailure, kModule, "could not bracket sigma from below", i);
      }
      hi = lo;
      lo *= 0.5;
      h = entropy_at(lo);
      if (converged(h)) return lo;
    }
  }

  for (int it = 0; it < kMaxBisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    h = entropy_at(mid);
    if (converged(h)) return mid;
    if (h < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw Error(Errc::kBracketFailure, kModule,
              "bisection did not reach the perplexity tolerance", i);
}

CondAffinity calibrate(const Dataset& data, double perp, double tol) {
  const std::size_t n = data.size();
  const double start = median_pairwise_distance(data);
  CondAffinity out{Matrix(n, n), std::vector<double>(n), perp};
  for (std::size_t i = 0; i < n; ++i) {
    const double sigma = solve_sigma(data, i, perp, tol, start);
    out.sigmas[i] = sigma;
    const auto sq = sq_distance_row(data, i);
    fill_row(sq, i, sigma, min_off(sq, i), out.rows.row(i));
  }
  return out;
}

Matrix symmetrize_rows(const Matrix& cond_rows) {
  const std::size_t n = cond_rows.rows();
  Matrix p(n, n);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = (cond_rows(i, j) + cond_rows(j, i)) * scale;
      p(i, j) = v;
      p(j, i) = v;
    }
  }
  return p;
}

SymAffinity symmetrize(const CondAffinity& cond) {
  return SymAffinity::from_matrix(symmetrize_rows(cond.rows));
}

AffinityBoundReport cp_bound_report(const CondAffinity& cond, const Dataset& data,
                                    double sigma_floor) {
  const std::size_t n = data.size();
  if (cond.size() != n || cond.sigmas.size() != n) {
    throw Error(Errc::kSizeMismatch, kModule, "affinity and dataset sizes differ");
  }
  const double min_sigma = *std::min_element(cond.sigmas.begin(), cond.sigmas.end());
  if (!(sigma_floor > 0.0) || sigma_floor > min_sigma) {
    throw Error(Errc::kInvalidArgument, kModule,
                "sigma floor must be positive and at most the smallest sigma");
  }

  AffinityBoundReport rep;
  rep.sigma_floor = sigma_floor;
  const double diam = data.diameter();
  rep.log_cp = diam * diam / (2.0 * sigma_floor * sigma_floor);
  rep.cp = std::exp(rep.log_cp);

  // log p_{j|i} straight from distances and sigmas.
  Matrix log_cond(n, n, -std::numeric_limits<double>::infinity());
  std::vector<double> expo(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = 1.0 / (2.0 * cond.sigmas[i] * cond.sigmas[i]);
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) expo[k++] = -data.sq_distance(i, j) * s;
    }
    const double log_z = log_sum_exp(expo);
    k = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) log_cond(i, j) = expo[k++] - log_z;
    }
  }

  const double slack = 1e-12 * (1.0 + rep.log_cp);
  const double log_nm1 = std::log(static_cast<double>(n - 1));
  const double log_two_n = std::log(2.0 * static_cast<double>(n));
  const double log_nn1 = std::log(static_cast<double>(n) * static_cast<double>(n - 1));
  rep.log_min_scaled_cond = rep.log_min_scaled_joint = std::numeric_limits<double>::infinity();
  rep.log_max_scaled_cond = rep.log_max_scaled_joint = -std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double lc = log_nm1 + log_cond(i, j);
      const double a = log_cond(i, j);
      const double b = log_cond(j, i);
      const double hi = std::max(a, b);
      const double lj = log_nn1 + hi + std::log1p(std::exp(std::min(a, b) - hi)) - log_two_n;
      rep.log_min_scaled_cond = std::min(rep.log_min_scaled_cond, lc);
      rep.log_max_scaled_cond = std::max(rep.log_max_scaled_cond, lc);
      rep.log_min_scaled_joint = std::min(rep.log_min_scaled_joint, lj);
      rep.log_max_scaled_joint = std::max(rep.log_max_scaled_joint, lj);
      const double dev = std::max(std::fabs(lc), std::fabs(lj));
      worst = std::max(worst, dev);
      if (dev > rep.log_cp + slack) {
        throw Error(Errc::kBoundViolated, kModule,
                    "affinity escapes the C_p comparability bounds", i, j);
      }
      ++rep.entries_checked;
    }
  }
  rep.min_scaled_cond = std::exp(rep.log_min_scaled_cond);
  rep.max_scaled_cond = std::exp(rep.log_max_scaled_cond);
  rep.margin = rep.log_cp - worst;
  return rep;
}

AffinityBoundReport cp_bound_report(const CondAffinity& cond, const Dataset& data) {
  return cp_bound_report(cond, data, *std::min_element(cond.sigmas.begin(), cond.sigmas.end()));
}

}  // namespace tsneflow
