#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "tsneflow/geometry.hpp"
#include "tsneflow/high_affinity.hpp"
#include "tsneflow_checks/oracles.hpp"

using namespace tsneflow;
using doctest::Approx;

namespace {

ManifoldSpec make(ManifoldKind kind, std::size_t d, std::uint64_t seed = 1) {
  ManifoldSpec s;
  s.kind = kind;
  s.ambient_dim = d;
  s.seed = seed;
  return s;
}

Dataset cloud(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(n, d);
  for (auto& v : m.data()) v = g(rng);
  return Dataset::from_matrix(std::move(m));
}

}  // namespace

TEST_CASE("samplers") {
  const auto c = sample(make(ManifoldKind::kCircle, 2), 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::hypot(c.point(i)[0], c.point(i)[1]) == Approx(1.0).epsilon(1e-12));
  }
  CHECK(c.provenance().kind == "circle");
  CHECK(c.provenance().seed == 1u);

  const auto s = sample(make(ManifoldKind::kSphere, 3, 5), 1000);
  for (std::size_t k = 0; k < 3; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 1000; ++i) mean += s.point(i)[k];
    mean /= 1000.0;
    // Each coordinate has variance 1/3 on the unit sphere.
    CHECK(std::abs(mean) <= 5.0 * std::sqrt(1.0 / 3.0 / 1000.0));
  }

  for (auto kind : {ManifoldKind::kCircle, ManifoldKind::kSphere, ManifoldKind::kTorus,
                    ManifoldKind::kSwissRoll, ManifoldKind::kGaussianClusters}) {
    const auto spec = make(kind, 3, 11);
    CHECK(sample(spec, 50).points() == sample(spec, 50).points());
    CHECK(parse_manifold_kind(to_string(kind)) == kind);
    CHECK(spec.intrinsic_dim() <= spec.ambient_dim);
  }

  // Torus points satisfy (sqrt(x^2+y^2) - R)^2 + z^2 = r^2.
  const auto t = sample(make(ManifoldKind::kTorus, 3), 200);
  for (std::size_t i = 0; i < 200; ++i) {
    const auto p = t.point(i);
    const double ring = std::hypot(p[0], p[1]) - 1.0;
    CHECK(std::sqrt(ring * ring + p[2] * p[2]) == Approx(0.3).epsilon(1e-12));
  }
  // Extra ambient coordinates stay zero.
  const auto c5 = sample(make(ManifoldKind::kCircle, 5), 20);
  for (std::size_t i = 0; i < 20; ++i) CHECK(c5.point(i)[4] == 0.0);
}

TEST_CASE("sampler spec validation") {
  CHECK(th::code_of([] { sample(make(ManifoldKind::kSphere, 2), 10); }) == Errc::kBadSpec);
  CHECK(th::code_of([] { sample(make(ManifoldKind::kCircle, 1), 10); }) == Errc::kBadSpec);
  CHECK(th::code_of([] { sample(make(ManifoldKind::kCircle, 2), 1); }) == Errc::kBadSpec);
  auto torus = make(ManifoldKind::kTorus, 3);
  torus.params.minor_radius = 2.0;
  CHECK(th::code_of([&] { sample(torus, 10); }) == Errc::kBadSpec);
  auto neg = make(ManifoldKind::kCircle, 2);
  neg.params.radius = -1.0;
  CHECK(th::code_of([&] { sample(neg, 10); }) == Errc::kBadSpec);
  auto none = make(ManifoldKind::kGaussianClusters, 2);
  none.params.clusters = 0;
  CHECK(th::code_of([&] { sample(none, 10); }) == Errc::kBadSpec);
  CHECK(th::code_of([] { parse_manifold_kind("klein_bottle"); }) == Errc::kBadSpec);
}

TEST_CASE("exact W1 examples") {
  std::mt19937_64 rng(3);
  const auto a = cloud(30, 2, rng);
  const auto same = w1_exact(a, a);
  CHECK(same.distance == 0.0);
  std::vector<std::size_t> id(30);
  std::iota(id.begin(), id.end(), std::size_t{0});
  CHECK(same.matching == id);

  Matrix moved = a.points();
  for (std::size_t i = 0; i < 30; ++i) {
    moved(i, 0) += 3.0;
    moved(i, 1) -= 4.0;
  }
  CHECK(w1_exact(a, Dataset::from_matrix(moved)).distance == Approx(5.0).epsilon(1e-12));

  const auto l = th::rows({{0.0}, {1.0}});
  const auto r = th::rows({{0.0}, {3.0}});
  CHECK(w1_exact(l, r).distance == Approx(1.0));

  // Matching is a permutation and its cost is the reported distance.
  const auto b = cloud(30, 2, rng);
  const auto res = w1_exact(a, b);
  auto sorted = res.matching;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == id);
  double cost = 0.0;
  for (std::size_t i = 0; i < 30; ++i) cost += std::sqrt(sq_distance(a.point(i), b.point(res.matching[i])));
  CHECK(cost / 30.0 == Approx(res.distance).epsilon(1e-14));

  for (std::size_t n = 2; n <= 7; ++n) {
    const auto x = cloud(n, 3, rng), y = cloud(n, 3, rng);
    CHECK(w1_exact(x, y).distance == Approx(checks::w1_brute_force(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("exact W1 metric axioms") {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 10; ++k) {
    const std::size_t n = 2 + 6 * k;
    const auto a = cloud(n, 2, rng), b = cloud(n, 2, rng), c = cloud(n, 2, rng);
    const double ab = w1_exact(a, b).distance;
    CHECK(ab > 0.0);
    CHECK(ab == Approx(w1_exact(b, a).distance).epsilon(1e-12));
    CHECK(ab <= w1_exact(a, c).distance + w1_exact(c, b).distance + 1e-12);
  }
}

TEST_CASE("exact W1 errors") {
  std::mt19937_64 rng(5);
  CHECK(th::code_of([&] { w1_exact(cloud(3, 2, rng), cloud(4, 2, rng)); }) == Errc::kSizeMismatch);
  CHECK(th::code_of([&] { w1_exact(cloud(3, 2, rng), cloud(3, 3, rng)); }) == Errc::kSizeMismatch);
  CHECK(th::code_of([&] { w1_exact(cloud(1025, 1, rng), cloud(1025, 1, rng)); }) == Errc::kTooLarge);
}

TEST_CASE("W1 convergence curve") {
  ManifoldSpec spec = make(ManifoldKind::kCircle, 2, 8);
  const std::vector<std::size_t> ns{16, 32, 64};
  const auto curve = w1_convergence_curve(spec, ns, 64);
  REQUIRE(curve.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(curve[k].first == ns[k]);
    CHECK(curve[k].second >= 0.0);
  }
  const std::vector<std::size_t> full{64};
  CHECK(w1_convergence_curve(spec, full, 64, spec.seed)[0].second == 0.0);
  CHECK(w1_convergence_curve(spec, full, 64)[0].second > 0.0);
  const std::vector<std::size_t> too_big{128};
  CHECK(th::code_of([&] { w1_convergence_curve(spec, too_big, 64); }) == Errc::kInvalidArgument);
  // Deterministic.
  CHECK(w1_convergence_curve(spec, ns, 64) == curve);
}

TEST_CASE("kernel integral") {
  const auto data = sample(make(ManifoldKind::kCircle, 2), 500);
  const std::vector<double> z{1.0, 0.0};
  CHECK(kernel_integral(data, z, 1e6 * data.diameter()) == Approx(1.0).epsilon(1e-12));
  const std::vector<double> far{100.0, 100.0};
  CHECK(kernel_integral(data, far, 1e-2) == 0.0);
  double prev = 0.0;
  for (double s = 1e-3; s < 10.0; s *= 1.5) {
    const double v = kernel_integral(data, z, s);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(th::code_of([&] { kernel_integral(data, z, 0.0); }) == Errc::kInvalidArgument);
  const std::vector<double> wrong{1.0};
  CHECK(th::code_of([&] { kernel_integral(data, wrong, 1.0); }) == Errc::kSizeMismatch);
}

TEST_CASE("intrinsic dimension") {
  const auto circle = sample(make(ManifoldKind::kCircle, 2, 2), 5000);
  const std::vector<double> zc{std::cos(1.0), std::sin(1.0)};
  std::vector<double> fixed;
  for (int k = 0; k < 12; ++k) fixed.push_back(0.02 * std::pow(10.0, k / 11.0));
  CHECK(estimate_intrinsic_dim(circle, zc, fixed) == Approx(1.0).epsilon(0.2));
  const auto grid = scaling_regime_grid(circle);
  REQUIRE(grid.size() == 12);
  CHECK(grid.back() == Approx(0.2 * circle.diameter()));
  CHECK(std::abs(estimate_intrinsic_dim(circle, zc, grid) - 1.0) <= 0.2);

  const auto sphere = sample(make(ManifoldKind::kSphere, 3, 2), 5000);
  const std::vector<double> zs{0.0, 0.6, 0.8};
  CHECK(std::abs(estimate_intrinsic_dim(sphere, zs, scaling_regime_grid(sphere)) - 2.0) <= 0.3);

  // Full-dimensional clusters: reported, not asserted.
  auto spec = make(ManifoldKind::kGaussianClusters, 3, 2);
  spec.params.clusters = 1;
  spec.params.spread = 1.0;
  const auto blob = sample(spec, 3000);
  const std::vector<double> zb(blob.point(0).begin(), blob.point(0).end());
  MESSAGE("gaussian blob in R^3, slope " << estimate_intrinsic_dim(blob, zb, scaling_regime_grid(blob)));

  const std::vector<double> one{0.1};
  CHECK(th::code_of([&] { estimate_intrinsic_dim(circle, zc, one); }) == Errc::kDegenerateGrid);
  const std::vector<double> flat{0.1, 0.1};
  CHECK(th::code_of([&] { estimate_intrinsic_dim(circle, zc, flat); }) == Errc::kDegenerateGrid);
  const std::vector<double> zero{0.0, 0.1};
  CHECK(th::code_of([&] { estimate_intrinsic_dim(circle, zc, zero); }) == Errc::kDegenerateGrid);
  CHECK(th::code_of([] { scaling_regime_grid(th::rows({{0.0}, {1.0}})); }) == Errc::kDegenerateGrid);
}

TEST_CASE("continuum entropy") {
  const auto data = sample(make(ManifoldKind::kCircle, 2, 3), 5000);
  const auto z = data.point(10);
  CHECK(std::abs(continuum_entropy(data, z, 1e6 * data.diameter())) <= 1e-6);

  // Decreasing sigma below 0.1 diam: -continuum_entropy strictly rises.
  double prev = -INFINITY;
  for (double s = 0.1 * data.diameter(); s > 2e-3; s *= 0.7) {
    const double neg = -continuum_entropy(data, z, s);
    CHECK(neg > prev);
    CHECK(neg <= std::log(5000.0) + 1e-12);
    prev = neg;
  }

  for (double sigma : {0.05, 0.1, 0.3}) {
    const double discrete = shannon_entropy(conditional_row(data, 10, sigma)) - std::log(5000.0);
    CHECK(std::abs(continuum_entropy(data, z, sigma) - discrete) <= 0.1);
  }
  CHECK(th::code_of([&] { continuum_entropy(data, z, -1.0); }) == Errc::kInvalidArgument);
}
