#include "tsneflow/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "tsneflow/error.hpp"

namespace tsneflow {

namespace {

constexpr const char* kModule = "affinity-hi";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

double sq_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

double Dataset::sq_distance(std::size_t i, std::size_t j) const noexcept {
  return tsneflow::sq_distance(points_.row(i), points_.row(j));
}

Dataset Dataset::from_matrix(Matrix points, Provenance provenance) {
  const std::size_t n = points.rows();
  if (n < 2) {
    throw Error(Errc::kInvalidDataset, kModule, "a dataset needs at least 2 points");
  }
  if (points.cols() == 0) {
    throw Error(Errc::kInvalidDataset, kModule, "points must have at least one coordinate");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (double v : points.row(i)) {
      if (!std::isfinite(v)) {
        throw Error(Errc::kNonFiniteInput, kModule, "non-finite coordinate", i);
      }
    }
  }

  double max_sq = 0.0;
  double min_sq = INFINITY;
  std::size_t min_i = 0;
  std::size_t min_j = 1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d2 = tsneflow::sq_distance(points.row(i), points.row(j));
      max_sq = std::max(max_sq, d2);
      if (d2 < min_sq) {
        min_sq = d2;
        min_i = i;
        min_j = j;
      }
    }
  }
  const double diameter = std::sqrt(max_sq);
  if (diameter == 0.0 || std::sqrt(min_sq) < kDuplicateTolerance * diameter) {
    throw Error(Errc::kDuplicatePoints, kModule, "duplicate points", min_i, min_j);
  }
  return Dataset(std::move(points), std::move(provenance), diameter);
}

Dataset read_csv(std::istream& in, Provenance provenance) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    if (rest.empty()) continue;
    std::size_t count = 0;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view field = trim(rest.substr(0, comma));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw Error(Errc::kParse, kModule,
                    "cannot parse value '" + std::string(field) + "' on line " +
                        std::to_string(line_no));
      }
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw Error(Errc::kParse, kModule,
                  "line " + std::to_string(line_no) + " has " + std::to_string(count) +
                      " columns, expected " + std::to_string(cols));
    }
    ++rows;
  }
  return Dataset::from_matrix(Matrix(rows, cols, std::move(values)), std::move(provenance));
}

Dataset read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::kIo, kModule, "cannot open " + path.string());
  }
  return read_csv(in, Provenance{"file:" + path.filename().string(), std::nullopt});
}

void write_csv(std::ostream& out, const Dataset& data) {
  char buf[64];
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data.point(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << ',';
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), row[k]);
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

void write_csv_file(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) {
    throw Error(Errc::kIo, kModule, "cannot write " + path.string());
  }
  write_csv(out, data);
}

}  // namespace tsneflow
