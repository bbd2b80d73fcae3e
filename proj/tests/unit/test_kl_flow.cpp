#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "tsneflow/geometry.hpp"
#include "tsneflow/kl_flow.hpp"
#include "tsneflow/student_affinity.hpp"
#include "tsneflow_checks/oracles.hpp"

using namespace tsneflow;
using doctest::Approx;

namespace {

SymAffinity uniform_p(std::size_t n) {
  Matrix m(n, n, 1.0 / (static_cast<double>(n) * static_cast<double>(n - 1)));
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 0.0;
  return SymAffinity::from_matrix(m);
}

EmbeddingState equilateral_state() {
  return th::state({{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2.0}});
}

SymAffinity random_p(std::size_t n, std::mt19937_64& rng) {
  return SymAffinity::from_matrix(checks::random_joint_affinity(n, rng));
}

EmbeddingState random_state(std::size_t n, std::mt19937_64& rng) {
  return {checks::random_configuration(n, checks::ConfigShape::kGaussian, rng), 0.0};
}

struct CircleProblem {
  SymAffinity p;
  std::size_t n;
};

CircleProblem circle_problem(std::size_t n, double perp, std::uint64_t seed) {
  ManifoldSpec spec;
  spec.seed = seed;
  return {symmetrize(calibrate(sample(spec, n), perp)), n};
}

}  // namespace

TEST_CASE("KL examples") {
  CHECK(kl_divergence(uniform_p(3), equilateral_state()) == Approx(0.0).scale(1.0).epsilon(1e-15));
  for (auto s : {th::state({{0, 0}, {1, 0}}), th::state({{0, 0}, {100, -3}})}) {
    CHECK(std::abs(kl_divergence(uniform_p(2), s)) <= 1e-14);
  }
  std::mt19937_64 rng(3);
  const auto p = random_p(10, rng);
  const auto s = random_state(10, rng);
  const double ref = static_cast<double>(checks::kl_reference(p.matrix(), s.y));
  CHECK(std::abs(kl_divergence(p, s) - ref) <= 1e-12);
  CHECK(kl_divergence(p, s) > 0.0);
}

TEST_CASE("gradient examples and structure") {
  for (const auto& g : kl_gradient(uniform_p(3), equilateral_state())) {
    CHECK(std::abs(g.x) <= 1e-15);
    CHECK(std::abs(g.y) <= 1e-15);
  }
  for (const auto& g : kl_gradient(uniform_p(2), th::state({{0, 0}, {2, 1}}))) {
    CHECK(std::abs(g.x) <= 1e-16);
    CHECK(std::abs(g.y) <= 1e-16);
  }

  std::mt19937_64 rng(17);
  const auto p = random_p(8, rng);
  const auto s = random_state(8, rng);
  const auto g = kl_gradient(p, s);
  const auto fd = checks::gradient_fd(p.matrix(), s.y, 1e-6);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(std::abs(g[i].x - fd[i].x) <= 1e-6 * std::max(1e-3, std::abs(fd[i].x)));
    CHECK(std::abs(g[i].y - fd[i].y) <= 1e-6 * std::max(1e-3, std::abs(fd[i].y)));
  }
  CHECK(checks::relative_max_error(g, checks::gradient_reference(p.matrix(), s.y)) <= 1e-12);

  Point2 sum;
  for (const auto& v : g) sum += v;
  CHECK(norm(sum) <= 1e-13);

  // Translation invariance and rotation equivariance.
  const double a = 0.9, c = std::cos(a), sn = std::sin(a);
  auto moved = s;
  for (auto& y : moved.y) y = Point2{c * y.x - sn * y.y, sn * y.x + c * y.y} + Point2{3.0, -2.0};
  const auto gm = kl_gradient(p, moved);
  for (std::size_t i = 0; i < 8; ++i) {
    const Point2 rot{c * g[i].x - sn * g[i].y, sn * g[i].x + c * g[i].y};
    CHECK(norm(gm[i] - rot) <= 1e-12 * (1.0 + norm(rot)));
  }
}

TEST_CASE("flow step") {
  SUBCASE("fixed point") {
    const auto s = equilateral_state();
    const auto r = flow_step(uniform_p(3), s, 0.5);
    for (std::size_t i = 0; i < 3; ++i) CHECK(norm(r.state.y[i] - s.y[i]) <= 1e-15);
    CHECK(r.state.t == Approx(0.5));
  }
  SUBCASE("KL decreases and the centre stays put") {
    std::mt19937_64 rng(23);
    for (auto method : {FlowMethod::kRk4, FlowMethod::kEuler}) {
      const auto p = random_p(12, rng);
      auto s = random_state(12, rng);
      recenter(s.y);
      for (int k = 0; k < 20; ++k) {
        const auto r = flow_step(p, s, 0.5, method);
        CHECK(r.kl_after <= r.kl_before + 1e-12);
        CHECK(norm(center_of_mass(r.state.y) - center_of_mass(s.y)) <= 1e-13);
        s = r.state;
      }
    }
  }
  SUBCASE("oversized steps are halved") {
    std::mt19937_64 rng(29);
    const auto p = random_p(6, rng);
    const auto s = random_state(6, rng);
    const auto r = flow_step(p, s, 1e6, FlowMethod::kEuler);
    CHECK(r.halvings > 0);
    CHECK(r.h_used == Approx(1e6 / std::pow(2.0, r.halvings)));
    CHECK(r.kl_after <= r.kl_before + 1e-12);
  }
  CHECK(th::code_of([] { flow_step(uniform_p(3), equilateral_state(), 0.0); }) ==
        Errc::kInvalidArgument);
  CHECK(th::code_of([] { flow_step(uniform_p(4), equilateral_state(), 0.1); }) ==
        Errc::kSizeMismatch);
}

TEST_CASE("integrate on circle data") {
  const auto prob = circle_problem(100, 10.0, 1);
  FlowOptions opts;
  opts.t_end = 50.0;
  const auto trace = integrate(prob.p, gaussian_init(100, 1), opts);
  REQUIRE(trace.records.size() == 501);
  CHECK(trace.steps == 500);
  CHECK(trace.records.front().t == 0.0);
  CHECK(trace.records.back().t == Approx(50.0));
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    CHECK(trace.records[k].kl < trace.records[k - 1].kl);
  }
  for (const auto& r : trace.records) CHECK(norm(r.com) <= 1e-12);

  // Trace self-consistency: dS/dt column against differences of the S column.
  std::vector<double> t, s;
  for (const auto& r : trace.records) {
    t.push_back(r.t);
    s.push_back(r.pair_sq_sum);
  }
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double fd = checks::fd_derivative(t, s, k);
    const double an = trace.records[k].pair_sq_sum_rate;
    CHECK(std::abs(fd - an) <= 1e-4 * std::abs(an));
  }
}

TEST_CASE("integrate details") {
  SUBCASE("constant trace at the fixed point") {
    FlowOptions opts;
    opts.t_end = 1.0;
    const auto trace = integrate(uniform_p(3), equilateral_state(), opts);
    for (const auto& r : trace.records) {
      CHECK(r.kl == Approx(trace.records.front().kl).epsilon(1e-15));
      CHECK(r.pair_sq_sum == Approx(trace.records.front().pair_sq_sum).epsilon(1e-14));
    }
  }
  SUBCASE("recording cadence and snapshots") {
    std::mt19937_64 rng(31);
    const auto p = random_p(7, rng);
    FlowOptions opts;
    opts.step = 0.3;
    opts.t_end = 2.0;
    opts.record_every = 3;
    opts.keep_snapshots = true;
    const auto trace = integrate(p, random_state(7, rng), opts);
    CHECK(trace.steps == 7);  // six full steps and a final partial one
    REQUIRE(trace.records.size() == 4);
    CHECK(trace.records[1].t == Approx(0.9));
    CHECK(trace.records.back().t == Approx(2.0));
    CHECK(trace.snapshots.size() == trace.records.size());
    CHECK(trace.final_state.t == Approx(2.0));
  }
  SUBCASE("initial state is recentred") {
    auto s = th::state({{10, 10}, {11, 10}, {10, 12}});
    FlowOptions opts;
    opts.t_end = 0.0;
    const auto trace = integrate(uniform_p(3), s, opts);
    REQUIRE(trace.records.size() == 1);
    CHECK(norm(trace.records[0].com) <= 1e-12);
  }
  SUBCASE("options validation") {
    FlowOptions bad;
    bad.step = -1.0;
    CHECK(th::code_of([&] { bad.validate(); }) == Errc::kInvalidArgument);
    bad = {};
    bad.alpha = 1.0;
    CHECK(th::code_of([&] { bad.validate(); }) == Errc::kInvalidArgument);
    bad = {};
    bad.record_every = 0;
    CHECK(th::code_of([&] { bad.validate(); }) == Errc::kInvalidArgument);
    CHECK(parse_flow_method("euler") == FlowMethod::kEuler);
    CHECK(to_string(FlowMethod::kRk4) == "rk4");
    CHECK(th::code_of([] { parse_flow_method("leapfrog"); }) == Errc::kInvalidArgument);
  }
}

TEST_CASE("discrete update") {
  std::mt19937_64 rng(37);
  const auto p = random_p(9, rng);
  const auto s = random_state(9, rng);

  const auto fixed = discrete_step(uniform_p(3), equilateral_state(), equilateral_state(), 200.0, 0.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(norm(fixed.y[i] - equilateral_state().y[i]) <= 1e-13);

  const double eta = 1e-3;
  const auto d = discrete_step(p, s, s, eta, 0.0);
  const auto e = flow_step(p, s, eta, FlowMethod::kEuler);
  REQUIRE(e.halvings == 0);
  for (std::size_t i = 0; i < 9; ++i) CHECK(d.y[i] == e.state.y[i]);

  // Zero gradient: only the momentum term moves the points.
  auto prev = equilateral_state();
  for (auto& y : prev.y) y -= Point2{0.2, 0.1};
  const auto m = discrete_step(uniform_p(3), equilateral_state(), prev, 1.0, 0.5);
  for (std::size_t i = 0; i < 3; ++i) {
    const Point2 disp = m.y[i] - equilateral_state().y[i];
    CHECK(disp.x == Approx(0.1));
    CHECK(disp.y == Approx(0.05));
  }
  CHECK(th::code_of([&] { discrete_step(p, s, s, 0.0, 0.0); }) == Errc::kInvalidArgument);
  CHECK(th::code_of([&] { discrete_step(p, s, s, 1.0, 1.0); }) == Errc::kInvalidArgument);
}

TEST_CASE("gaussian init and trace csv") {
  const auto a = gaussian_init(50, 7);
  const auto b = gaussian_init(50, 7);
  CHECK(a.y == b.y);
  CHECK(norm(center_of_mass(a.y)) <= 1e-15);
  double var = 0.0;
  for (const auto& y : a.y) var += norm_sq(y);
  CHECK(std::sqrt(var / 100.0) == Approx(1e-2).epsilon(0.3));

  std::mt19937_64 rng(41);
  FlowOptions opts;
  opts.t_end = 0.2;
  const auto trace = integrate(random_p(4, rng), random_state(4, rng), opts);
  std::ostringstream os;
  write_trace_csv(os, trace);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,kl,com_x,com_y,S,dSdt_analytic,max_norm,min_dist,max_dist");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 8);
  }
  CHECK(rows == trace.records.size());
}

TEST_CASE("step failure carries the state") {
  const StepFailure f("stuck", equilateral_state());
  CHECK(f.code() == Errc::kStepFailure);
  CHECK(f.module() == "kl-flow");
  CHECK(f.state().size() == 3);
}
