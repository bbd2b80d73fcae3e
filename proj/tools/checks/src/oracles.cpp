#include "tsneflow_checks/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tsneflow::checks {

namespace {

long double sq_dist(const Point2& a, const Point2& b) {
  const long double dx = static_cast<long double>(a.x) - b.x;
  const long double dy = static_cast<long double>(a.y) - b.y;
  return dx * dx + dy * dy;
}

}  // namespace

long double kl_reference(const Matrix& p, const std::vector<Point2>& y) {
  const std::size_t n = y.size();
  long double z = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) z += 1.0L / (1.0L + sq_dist(y[i], y[j]));
  long double kl = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || p(i, j) == 0.0) continue;
      const long double q = 1.0L / (1.0L + sq_dist(y[i], y[j])) / z;
      kl += p(i, j) * std::log(p(i, j) / q);
    }
  }
  return kl;
}

std::vector<Point2> gradient_reference(const Matrix& p, const std::vector<Point2>& y) {
  const std::size_t n = y.size();
  long double z = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) z += 1.0L / (1.0L + sq_dist(y[i], y[j]));
  std::vector<Point2> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    long double gx = 0, gy = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const long double w = 1.0L / (1.0L + sq_dist(y[i], y[j]));
      const long double c = 4.0L * (p(i, j) - w / z) * w;
      gx += c * (static_cast<long double>(y[i].x) - y[j].x);
      gy += c * (static_cast<long double>(y[i].y) - y[j].y);
    }
    g[i] = {static_cast<double>(gx), static_cast<double>(gy)};
  }
  return g;
}

std::vector<Point2> gradient_fd(const Matrix& p, const std::vector<Point2>& y, double h) {
  std::vector<Point2> g(y.size());
  auto work = y;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (int axis = 0; axis < 2; ++axis) {
      double& coord = axis == 0 ? work[i].x : work[i].y;
      const double orig = coord;
      coord = orig + h;
      const long double up = kl_reference(p, work);
      coord = orig - h;
      const long double down = kl_reference(p, work);
      coord = orig;
      const double d = static_cast<double>((up - down) / (2.0L * h));
      (axis == 0 ? g[i].x : g[i].y) = d;
    }
  }
  return g;
}

double pair_sq_sum_reference(const std::vector<Point2>& y) {
  long double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      if (i != j) s += sq_dist(y[i], y[j]);
  return static_cast<double>(s);
}

double pair_sq_sum_rate_reference(const Matrix& p, const std::vector<Point2>& y) {
  // dS/dt = Σ_i ∂S/∂y_i · y_i' with ∂S/∂y_i = 4 Σ_j (y_i - y_j).
  const auto g = gradient_reference(p, y);
  long double rate = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    long double sx = 0, sy = 0;
    for (std::size_t j = 0; j < y.size(); ++j) {
      sx += static_cast<long double>(y[i].x) - y[j].x;
      sy += static_cast<long double>(y[i].y) - y[j].y;
    }
    rate -= 4.0L * (sx * g[i].x + sy * g[i].y);
  }
  return static_cast<double>(rate);
}

double fd_derivative(std::span<const double> t, std::span<const double> v, std::size_t k) {
  if (t.size() != v.size() || t.size() < 2) throw std::invalid_argument("fd_derivative: bad nodes");
  const std::size_t width = std::min<std::size_t>(5, t.size());
  std::size_t lo = k >= width / 2 ? k - width / 2 : 0;
  lo = std::min(lo, t.size() - width);

  // Fornberg's recursion for the weights of orders 0 and 1 at x0 = t[k].
  const double x0 = t[k];
  std::vector<std::vector<double>> c0(width, std::vector<double>(width, 0.0));
  std::vector<std::vector<double>> c1 = c0;
  c0[0][0] = 1.0;
  double c_prev = 1.0;
  for (std::size_t a = 1; a < width; ++a) {
    double c_cur = 1.0;
    for (std::size_t b = 0; b < a; ++b) {
      const double diff = t[lo + a] - t[lo + b];
      c_cur *= diff;
      const double xa = t[lo + a] - x0;
      const double xb = t[lo + b] - x0;
      if (b == a - 1) {
        c1[a][a] = c_prev * (c0[a - 1][b] - xb * c1[a - 1][b]) / c_cur;
        c0[a][a] = -c_prev * xb * c0[a - 1][b] / c_cur;
      }
      c1[a][b] = (xa * c1[a - 1][b] - c0[a - 1][b]) / diff;
      c0[a][b] = xa * c0[a - 1][b] / diff;
    }
    c_prev = c_cur;
  }
  long double d = 0;
  for (std::size_t b = 0; b < width; ++b) d += c1[width - 1][b] * v[lo + b];
  return static_cast<double>(d);
}

double entropy_reference(std::span<const double> row) {
  long double total = 0;
  for (double x : row) total += x;
  long double h = 0;
  for (double x : row) {
    if (x > 0) {
      const long double q = x / total;
      h -= q * std::log(q);
    }
  }
  return static_cast<double>(h);
}

std::vector<double> log_cond_row_reference(const Dataset& data, std::size_t i, double sigma) {
  const std::size_t n = data.size();
  std::vector<long double> a(n, -std::numeric_limits<long double>::infinity());
  long double top = -std::numeric_limits<long double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    long double d2 = 0;
    for (std::size_t k = 0; k < data.dim(); ++k) {
      const long double diff = static_cast<long double>(data.point(i)[k]) - data.point(j)[k];
      d2 += diff * diff;
    }
    a[j] = -d2 / (2.0L * sigma * sigma);
    top = std::max(top, a[j]);
  }
  long double sum = 0;
  for (std::size_t j = 0; j < n; ++j)
    if (j != i) sum += std::exp(a[j] - top);
  const long double log_norm = top + std::log(sum);
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = static_cast<double>(a[j] - log_norm);
  return out;
}

double qprime_sq_sum_reference(const std::vector<Point2>& y) {
  long double s2 = 0, s4 = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (i == j) continue;
      const long double inv = 1.0L / sq_dist(y[i], y[j]);
      s2 += inv;
      s4 += inv * inv;
    }
  }
  return static_cast<double>(s4 / (s2 * s2));
}

double w1_brute_force(const Dataset& a, const Dataset& b) {
  const std::size_t n = a.size();
  if (n != b.size() || n > 8) throw std::invalid_argument("w1_brute_force: bad sizes");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  long double best = std::numeric_limits<long double>::infinity();
  do {
    long double cost = 0;
    for (std::size_t i = 0; i < n; ++i) {
      long double d2 = 0;
      for (std::size_t k = 0; k < a.dim(); ++k) {
        const long double diff = static_cast<long double>(a.point(i)[k]) - b.point(perm[i])[k];
        d2 += diff * diff;
      }
      cost += std::sqrt(d2);
    }
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best / n);
}

Matrix random_joint_affinity(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> expo(-3.0, 0.0);
  Matrix p(n, n);
  long double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::pow(10.0, expo(rng));
      p(i, j) = p(j, i) = v;
      total += 2.0L * v;
    }
  }
  for (auto& v : p.data()) v = static_cast<double>(v / total);
  // Rounding can leave the mass a few ulps off; push the residue into one pair.
  long double mass = 0;
  for (double v : p.data()) mass += v;
  const double fix = static_cast<double>((1.0L - mass) / 2.0L);
  p(0, 1) += fix;
  p(1, 0) += fix;
  return p;
}

std::vector<Point2> random_configuration(std::size_t n, ConfigShape shape, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point2> y(n);
  switch (shape) {
    case ConfigShape::kGaussian: {
      const double scale = std::pow(10.0, 4.0 * unit(rng) - 2.0);
      for (auto& p : y) p = {scale * gauss(rng), scale * gauss(rng)};
      break;
    }
    case ConfigShape::kLine: {
      const double angle = 6.283185307179586 * unit(rng);
      const double jitter = 1e-3 * unit(rng);
      for (std::size_t i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) + jitter * gauss(rng);
        y[i] = {s * std::cos(angle), s * std::sin(angle)};
      }
      break;
    }
    case ConfigShape::kMultiscale: {
      // Points spread over scales 10^-3 .. 10^3 around random centres.
      for (auto& p : y) {
        const double scale = std::pow(10.0, 6.0 * unit(rng) - 3.0);
        p = {scale * gauss(rng), scale * gauss(rng)};
      }
      break;
    }
  }
  return y;
}

double relative_max_error(const std::vector<Point2>& a, const std::vector<Point2>& b) {
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    err = std::max({err, std::abs(a[i].x - b[i].x), std::abs(a[i].y - b[i].y)});
    ref = std::max({ref, std::abs(b[i].x), std::abs(b[i].y)});
  }
  return ref > 0.0 ? err / ref : err;
}

}  // namespace tsneflow::checks
