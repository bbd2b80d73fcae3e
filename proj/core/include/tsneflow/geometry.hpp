#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "tsneflow/dataset.hpp"

namespace tsneflow {

enum class ManifoldKind { kCircle, kSphere, kTorus, kSwissRoll, kGaussianClusters };

std::string_view to_string(ManifoldKind kind);
ManifoldKind parse_manifold_kind(std::string_view s);

struct ManifoldParams {
  double radius = 1.0;        // circle/sphere radius, torus major radius, cluster box half-width
  double minor_radius = 0.3;  // torus tube radius
  double height = 10.0;       // swiss roll width along its axis
  double spread = 0.1;        // gaussian cluster standard deviation
  std::size_t clusters = 3;
};

/// A sampling model: manifold kind embedded in R^ambient_dim with the uniform
/// (area) measure, or isotropic Gaussian clusters filling R^ambient_dim.
struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::kCircle;
  std::size_t ambient_dim = 2;
  ManifoldParams params;
  std::uint64_t seed = 0;

  /// 1 for the circle, 2 for sphere/torus/swiss roll, ambient_dim for clusters.
  std::size_t intrinsic_dim() const noexcept;

  /// Throws BadSpec on non-positive parameters or too small an ambient dimension.
  void validate() const;
};

/// n i.i.d. points, deterministic in (spec, n).
Dataset sample(const ManifoldSpec& spec, std::size_t n);

struct W1Result {
  double distance = 0.0;
  std::vector<std::size_t> matching;  // matching[i] = index in b assigned to a[i]
};

inline constexpr std::size_t kMaxExactW1Size = 1024;

/// Exact 1-Wasserstein distance between two equal-size empirical measures:
/// minimum-cost perfect matching under Euclidean cost, divided by n.
W1Result w1_exact(const Dataset& a, const Dataset& b);

/// W1 between an n-point sample and a size-n random subset of an m_ref-point
/// reference sample, for each n. The n-samples use spec.seed; the reference
/// uses `reference_seed` (default: derived from spec.seed). When n == m_ref
/// the full reference is used.
std::vector<std::pair<std::size_t, double>> w1_convergence_curve(
    const ManifoldSpec& spec, std::span<const std::size_t> n_list, std::size_t m_ref,
    std::optional<std::uint64_t> reference_seed = std::nullopt);

/// (1/n) Σ exp(-|x_i - z|^2 / 2 sigma^2).
double kernel_integral(const Dataset& data, std::span<const double> z, double sigma);

/// 12-point (default) geometric grid from 2x the median nearest-neighbour
/// distance to 0.2x the diameter.
std::vector<double> scaling_regime_grid(const Dataset& data, std::size_t count = 12);

/// Least-squares slope of log kernel_integral against log sigma.
/// Throws DegenerateGrid for fewer than two distinct positive sigmas or a
/// vanishing kernel integral.
double estimate_intrinsic_dim(const Dataset& data, std::span<const double> z,
                              std::span<const double> sigma_grid);

/// -∫ f log f dμ_n with f = k_z / ∫ k_z dμ_n, k_z(x) = exp(-|x - z|^2 / 2 sigma^2),
/// μ_n the empirical measure of `data`. Non-positive; tends to 0 as sigma grows
/// and to -infinity (down to -log n) as sigma shrinks.
double continuum_entropy(const Dataset& data, std::span<const double> z, double sigma);

}  // namespace tsneflow
