#include "tsneflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "tsneflow/error.hpp"

namespace tsneflow {

namespace {

constexpr const char* kModule = "geometry";
constexpr double kInf = std::numeric_limits<double>::infinity();

void fill_circle(const ManifoldSpec& spec, std::mt19937_64& rng, std::span<double> x) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double t = angle(rng);
  x[0] = spec.params.radius * std::cos(t);
  x[1] = spec.params.radius * std::sin(t);
}

void fill_sphere(const ManifoldSpec& spec, std::mt19937_64& rng, std::span<double> x) {
  std::normal_distribution<double> gauss;
  double a = 0, b = 0, c = 0, len = 0;
  do {
    a = gauss(rng);
    b = gauss(rng);
    c = gauss(rng);
    len = std::sqrt(a * a + b * b + c * c);
  } while (len < 1e-12);
  const double s = spec.params.radius / len;
  x[0] = a * s;
  x[1] = b * s;
  x[2] = c * s;
}

// Area element of the torus is proportional to R + r cos(phi).
void fill_torus(const ManifoldSpec& spec, std::mt19937_64& rng, std::span<double> x) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double big = spec.params.radius;
  const double small = spec.params.minor_radius;
  double phi = 0.0;
  do {
    phi = angle(rng);
  } while (unit(rng) * (big + small) > big + small * std::cos(phi));
  const double theta = angle(rng);
  x[0] = (big + small * std::cos(phi)) * std::cos(theta);
  x[1] = (big + small * std::cos(phi)) * std::sin(theta);
  x[2] = small * std::sin(phi);
}

// Roll parameter t in [1.5 pi, 4.5 pi]; arc length element sqrt(1 + t^2).
void fill_swiss_roll(const ManifoldSpec& spec, std::mt19937_64& rng, std::span<double> x) {
  constexpr double lo = 1.5 * std::numbers::pi;
  constexpr double hi = 4.5 * std::numbers::pi;
  std::uniform_real_distribution<double> roll(lo, hi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double max_speed = std::sqrt(1.0 + hi * hi);
  double t = 0.0;
  do {
    t = roll(rng);
  } while (unit(rng) * max_speed > std::sqrt(1.0 + t * t));
  x[0] = t * std::cos(t);
  x[1] = spec.params.height * unit(rng);
  x[2] = t * std::sin(t);
}

std::vector<double> nearest_neighbour_distances(const Dataset& data) {
  const std::size_t n = data.size();
  std::vector<double> nn(n, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d2 = data.sq_distance(i, j);
      nn[i] = std::min(nn[i], d2);
      nn[j] = std::min(nn[j], d2);
    }
  }
  for (auto& v : nn) v = std::sqrt(v);
  return nn;
}

void require_point_dim(const Dataset& data, std::span<const double> z) {
  if (z.size() != data.dim()) {
    throw Error(Errc::kSizeMismatch, kModule, "query point dimension differs from the data");
  }
}

// Hungarian algorithm with row/column potentials, O(n^3). cost is n x n
// row-major; returns assignment row -> column.
std::vector<std::size_t> min_cost_assignment(const std::vector<double>& cost, std::size_t n) {
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      const double* row = &cost[(i0 - 1) * n];
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
  return assignment;
}

}  // namespace

std::string_view to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::kCircle: return "circle";
    case ManifoldKind::kSphere: return "sphere";
    case ManifoldKind::kTorus: return "torus";
    case ManifoldKind::kSwissRoll: return "swiss_roll";
    case ManifoldKind::kGaussianClusters: return "gaussian_clusters";
  }
  return "unknown";
}

ManifoldKind parse_manifold_kind(std::string_view s) {
  for (auto k : {ManifoldKind::kCircle, ManifoldKind::kSphere, ManifoldKind::kTorus,
                 ManifoldKind::kSwissRoll, ManifoldKind::kGaussianClusters}) {
    if (to_string(k) == s) return k;
  }
  throw Error(Errc::kBadSpec, kModule, "unknown manifold kind '" + std::string(s) + "'");
}

std::size_t ManifoldSpec::intrinsic_dim() const noexcept {
  switch (kind) {
    case ManifoldKind::kCircle: return 1;
    case ManifoldKind::kSphere:
    case ManifoldKind::kTorus:
    case ManifoldKind::kSwissRoll: return 2;
    case ManifoldKind::kGaussianClusters: return ambient_dim;
  }
  return ambient_dim;
}

void ManifoldSpec::validate() const {
  const std::size_t min_dim = kind == ManifoldKind::kCircle || kind == ManifoldKind::kGaussianClusters
                                  ? 2
                                  : 3;
  if (ambient_dim < min_dim) {
    throw Error(Errc::kBadSpec, kModule,
                std::string(to_string(kind)) + " needs ambient dimension >= " +
                    std::to_string(min_dim));
  }
  if (!(params.radius > 0.0) || !std::isfinite(params.radius)) {
    throw Error(Errc::kBadSpec, kModule, "radius must be positive");
  }
  switch (kind) {
    case ManifoldKind::kTorus:
      if (!(params.minor_radius > 0.0 && params.minor_radius < params.radius)) {
        throw Error(Errc::kBadSpec, kModule, "torus needs 0 < minor_radius < radius");
      }
      break;
    case ManifoldKind::kSwissRoll:
      if (!(params.height > 0.0)) throw Error(Errc::kBadSpec, kModule, "height must be positive");
      break;
    case ManifoldKind::kGaussianClusters:
      if (!(params.spread > 0.0)) throw Error(Errc::kBadSpec, kModule, "spread must be positive");
      if (params.clusters == 0) throw Error(Errc::kBadSpec, kModule, "need at least one cluster");
      break;
    default:
      break;
  }
}

Dataset sample(const ManifoldSpec& spec, std::size_t n) {
  spec.validate();
  if (n < 2) throw Error(Errc::kBadSpec, kModule, "sample size must be at least 2");
  std::mt19937_64 rng(spec.seed);
  Matrix x(n, spec.ambient_dim);

  if (spec.kind == ManifoldKind::kGaussianClusters) {
    std::uniform_real_distribution<double> box(-spec.params.radius, spec.params.radius);
    std::normal_distribution<double> gauss(0.0, spec.params.spread);
    Matrix centers(spec.params.clusters, spec.ambient_dim);
    for (auto& c : centers.data()) c = box(rng);
    std::uniform_int_distribution<std::size_t> pick(0, spec.params.clusters - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = centers.row(pick(rng));
      auto row = x.row(i);
      for (std::size_t k = 0; k < row.size(); ++k) row[k] = c[k] + gauss(rng);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      switch (spec.kind) {
        case ManifoldKind::kCircle: fill_circle(spec, rng, x.row(i)); break;
        case ManifoldKind::kSphere: fill_sphere(spec, rng, x.row(i)); break;
        case ManifoldKind::kTorus: fill_torus(spec, rng, x.row(i)); break;
        case ManifoldKind::kSwissRoll: fill_swiss_roll(spec, rng, x.row(i)); break;
        case ManifoldKind::kGaussianClusters: break;
      }
    }
  }
  return Dataset::from_matrix(std::move(x), Provenance{std::string(to_string(spec.kind)), spec.seed});
}

W1Result w1_exact(const Dataset& a, const Dataset& b) {
  if (a.size() != b.size() || a.dim() != b.dim()) {
    throw Error(Errc::kSizeMismatch, kModule, "exact W1 needs equal sizes and dimensions");
  }
  const std::size_t n = a.size();
  if (n > kMaxExactW1Size) {
    throw Error(Errc::kTooLarge, kModule,
                "exact W1 limited to " + std::to_string(kMaxExactW1Size) + " points");
  }
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cost[i * n + j] = std::sqrt(sq_distance(a.point(i), b.point(j)));
    }
  }
  W1Result out;
  out.matching = min_cost_assignment(cost, n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += cost[i * n + out.matching[i]];
  out.distance = total / static_cast<double>(n);
  return out;
}

std::vector<std::pair<std::size_t, double>> w1_convergence_curve(
    const ManifoldSpec& spec, std::span<const std::size_t> n_list, std::size_t m_ref,
    std::optional<std::uint64_t> reference_seed) {
  for (auto n : n_list) {
    if (n > m_ref) {
      throw Error(Errc::kInvalidArgument, kModule, "sample sizes must not exceed m_ref");
    }
  }
  ManifoldSpec ref_spec = spec;
  ref_spec.seed = reference_seed.value_or(spec.seed ^ 0x9E3779B97F4A7C15ULL);
  const Dataset reference = sample(ref_spec, m_ref);

  std::vector<std::pair<std::size_t, double>> curve;
  for (auto n : n_list) {
    const Dataset ours = sample(spec, n);
    if (n == m_ref) {
      curve.emplace_back(n, w1_exact(ours, reference).distance);
      continue;
    }
    std::vector<std::size_t> idx(m_ref);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(ref_spec.seed + n);
    std::shuffle(idx.begin(), idx.end(), rng);
    Matrix sub(n, reference.dim());
    for (std::size_t i = 0; i < n; ++i) {
      const auto src = reference.point(idx[i]);
      std::copy(src.begin(), src.end(), sub.row(i).begin());
    }
    const Dataset subset = Dataset::from_matrix(std::move(sub), reference.provenance());
    curve.emplace_back(n, w1_exact(ours, subset).distance);
  }
  return curve;
}

double kernel_integral(const Dataset& data, std::span<const double> z, double sigma) {
  require_point_dim(data, z);
  if (!(sigma > 0.0)) throw Error(Errc::kInvalidArgument, kModule, "sigma must be positive");
  const double s = 1.0 / (2.0 * sigma * sigma);
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    acc += std::exp(-sq_distance(data.point(i), z) * s);
  }
  return acc / static_cast<double>(data.size());
}

std::vector<double> scaling_regime_grid(const Dataset& data, std::size_t count) {
  if (count < 2) throw Error(Errc::kDegenerateGrid, kModule, "grid needs at least 2 points");
  auto nn = nearest_neighbour_distances(data);
  auto mid = nn.begin() + static_cast<std::ptrdiff_t>(nn.size() / 2);
  std::nth_element(nn.begin(), mid, nn.end());
  const double lo = 2.0 * *mid;
  const double hi = 0.2 * data.diameter();
  if (!(lo < hi)) {
    throw Error(Errc::kDegenerateGrid, kModule, "sample too sparse for a scaling regime");
  }
  std::vector<double> grid(count);
  const double ratio = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) grid[k] = lo * std::exp(ratio * static_cast<double>(k));
  return grid;
}

double estimate_intrinsic_dim(const Dataset& data, std::span<const double> z,
                              std::span<const double> sigma_grid) {
  require_point_dim(data, z);
  if (sigma_grid.size() < 2) {
    throw Error(Errc::kDegenerateGrid, kModule, "need at least two bandwidths");
  }
  std::vector<double> xs, ys;
  for (double sigma : sigma_grid) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw Error(Errc::kDegenerateGrid, kModule, "bandwidths must be positive and finite");
    }
    const double k = kernel_integral(data, z, sigma);
    if (!(k > 0.0)) {
      throw Error(Errc::kDegenerateGrid, kModule, "kernel integral vanishes on the grid");
    }
    xs.push_back(std::log(sigma));
    ys.push_back(std::log(k));
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (!(sxx > 0.0)) throw Error(Errc::kDegenerateGrid, kModule, "bandwidths are all equal");
  return sxy / sxx;
}

double continuum_entropy(const Dataset& data, std::span<const double> z, double sigma) {
  require_point_dim(data, z);
  if (!(sigma > 0.0)) throw Error(Errc::kInvalidArgument, kModule, "sigma must be positive");
  const double s = 1.0 / (2.0 * sigma * sigma);
  const std::size_t n = data.size();
  std::vector<double> expo(n);
  for (std::size_t i = 0; i < n; ++i) expo[i] = sq_distance(data.point(i), z) * s;
  const double shift = *std::min_element(expo.begin(), expo.end());
  double mass = 0.0;
  double weighted = 0.0;
  for (double a : expo) {
    const double e = std::exp(-(a - shift));
    mass += e;
    weighted += e * a;
  }
  // log ∫ k dμ_n = -shift + log(mass / n); the first term is E_f[|x - z|^2 s].
  return weighted / mass - shift + std::log(mass / static_cast<double>(n));
}

}  // namespace tsneflow
