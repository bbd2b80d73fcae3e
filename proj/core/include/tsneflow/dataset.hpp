#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "tsneflow/matrix.hpp"

namespace tsneflow {

/// Where a dataset came from. Empty kind means "loaded from a file".
struct Provenance {
  std::string kind;
  std::optional<std::uint64_t> seed;
};

/// n points in R^d. Construction validates the invariants: n >= 2, every
/// coordinate finite, and no two points closer than 1e-14 * diameter.
class Dataset {
 public:
  static constexpr double kDuplicateTolerance = 1e-14;

  static Dataset from_matrix(Matrix points, Provenance provenance = {});

  std::size_t size() const noexcept { return points_.rows(); }
  std::size_t dim() const noexcept { return points_.cols(); }
  std::span<const double> point(std::size_t i) const noexcept { return points_.row(i); }
  const Matrix& points() const noexcept { return points_; }
  const Provenance& provenance() const noexcept { return provenance_; }

  /// Largest pairwise Euclidean distance, computed once at construction.
  double diameter() const noexcept { return diameter_; }

  double sq_distance(std::size_t i, std::size_t j) const noexcept;

 private:
  Dataset(Matrix points, Provenance provenance, double diameter)
      : points_(std::move(points)), provenance_(std::move(provenance)), diameter_(diameter) {}

  Matrix points_;
  Provenance provenance_;
  double diameter_ = 0.0;
};

double sq_distance(std::span<const double> a, std::span<const double> b) noexcept;

// Headerless CSV, one point per line, shortest round-trip decimal per value.
Dataset read_csv(std::istream& in, Provenance provenance = {});
Dataset read_csv_file(const std::filesystem::path& path);
void write_csv(std::ostream& out, const Dataset& data);
void write_csv_file(const std::filesystem::path& path, const Dataset& data);

}  // namespace tsneflow
