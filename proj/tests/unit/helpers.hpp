#pragma once

#include <cmath>
#include <initializer_list>
#include <vector>

#include "tsneflow/dataset.hpp"
#include "tsneflow/embedding.hpp"
#include "tsneflow/error.hpp"

namespace th {

inline tsneflow::Dataset rows(std::initializer_list<std::vector<double>> pts) {
  const std::size_t d = pts.begin()->size();
  tsneflow::Matrix m(pts.size(), d);
  std::size_t i = 0;
  for (const auto& p : pts) {
    for (std::size_t k = 0; k < d; ++k) m(i, k) = p[k];
    ++i;
  }
  return tsneflow::Dataset::from_matrix(std::move(m));
}

inline tsneflow::Dataset equilateral() {
  return rows({{0.0, 0.0}, {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}});
}

inline tsneflow::EmbeddingState state(std::initializer_list<tsneflow::Point2> pts) {
  return {std::vector<tsneflow::Point2>(pts), 0.0};
}

// Runs f and returns the error code it throws; fails the test if nothing is thrown.
template <class F>
tsneflow::Errc code_of(F&& f) {
  try {
    f();
  } catch (const tsneflow::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected tsneflow::Error");
}

}  // namespace th
