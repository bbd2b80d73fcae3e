#include "tsneflow/embedding.hpp"

namespace tsneflow {

Point2 center_of_mass(const std::vector<Point2>& y) noexcept {
  Point2 c;
  for (const auto& p : y) c += p;
  if (!y.empty()) c *= 1.0 / static_cast<double>(y.size());
  return c;
}

void recenter(std::vector<Point2>& y) noexcept {
  const Point2 c = center_of_mass(y);
  for (auto& p : y) p -= c;
}

}  // namespace tsneflow
