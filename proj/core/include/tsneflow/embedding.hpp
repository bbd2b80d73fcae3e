#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace tsneflow {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Point2& operator+=(const Point2& o) noexcept { x += o.x; y += o.y; return *this; }
  Point2& operator-=(const Point2& o) noexcept { x -= o.x; y -= o.y; return *this; }
  Point2& operator*=(double s) noexcept { x *= s; y *= s; return *this; }
  friend Point2 operator+(Point2 a, const Point2& b) noexcept { return a += b; }
  friend Point2 operator-(Point2 a, const Point2& b) noexcept { return a -= b; }
  friend Point2 operator*(double s, Point2 a) noexcept { return a *= s; }
  friend Point2 operator*(Point2 a, double s) noexcept { return a *= s; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double dot(const Point2& a, const Point2& b) noexcept { return a.x * b.x + a.y * b.y; }
inline double norm_sq(const Point2& a) noexcept { return dot(a, a); }
inline double norm(const Point2& a) noexcept { return std::hypot(a.x, a.y); }

/// Embedded points y_1..y_n in the plane at flow time t.
struct EmbeddingState {
  std::vector<Point2> y;
  double t = 0.0;

  std::size_t size() const noexcept { return y.size(); }
};

Point2 center_of_mass(const std::vector<Point2>& y) noexcept;

/// Shifts the points so their mean is the origin.
void recenter(std::vector<Point2>& y) noexcept;

}  // namespace tsneflow
