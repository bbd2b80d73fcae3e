#include "tsneflow_checks/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <future>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "tsneflow/diagnostics.hpp"
#include "tsneflow/error.hpp"
#include "tsneflow/geometry.hpp"
#include "tsneflow/student_affinity.hpp"
#include "tsneflow_checks/oracles.hpp"

namespace tsneflow::checks {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string sci(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << std::scientific << v;
  return os.str();
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class F>
CheckResult timed(std::string name, F&& body) {
  CheckResult r;
  r.name = std::move(name);
  const auto start = Clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.skipped = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = seconds_since(start);
  return r;
}

CheckResult skipped(std::string name, std::string why) {
  CheckResult r;
  r.name = std::move(name);
  r.passed = true;
  r.skipped = true;
  r.detail = std::move(why);
  return r;
}

Dataset circle(std::size_t n, std::uint64_t seed) {
  ManifoldSpec spec;
  spec.kind = ManifoldKind::kCircle;
  spec.ambient_dim = 2;
  spec.seed = seed;
  return sample(spec, n);
}

Dataset sphere(std::size_t n, std::uint64_t seed) {
  ManifoldSpec spec;
  spec.kind = ManifoldKind::kSphere;
  spec.ambient_dim = 3;
  spec.seed = seed;
  return sample(spec, n);
}

double oracle_diameter(const Dataset& data) {
  double best = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = i + 1; j < data.size(); ++j)
      best = std::max(best, sq_distance(data.point(i), data.point(j)));
  return std::sqrt(best);
}

double resolve_perp(const SuiteOptions& opts, std::size_t n) {
  if (opts.perp) return *opts.perp;
  if (opts.zeta) return *opts.zeta * static_cast<double>(n - 1);
  return 10.0;
}

std::string degenerate_notice(std::size_t n) {
  return "degenerate interval: perplexity must lie in (1, n-1) = (1, " + std::to_string(n - 1) +
         ") for n = " + std::to_string(n) + "; perplexity checks skipped";
}

struct FlowFixture {
  Dataset data;
  CondAffinity cond;
  SymAffinity p;
  FlowTrace trace;
};

FlowFixture build_fixture(const SuiteOptions& opts) {
  Dataset data = opts.data ? *opts.data : circle(100, opts.seed);
  CondAffinity cond = calibrate(data, resolve_perp(opts, data.size()));
  SymAffinity p = symmetrize(cond);
  FlowOptions flow = opts.flow;
  flow.keep_snapshots = true;
  FlowTrace trace = integrate(p, gaussian_init(data.size(), opts.seed), flow);
  return {std::move(data), std::move(cond), std::move(p), std::move(trace)};
}

// ---------------------------------------------------------------------------

CheckResult check_pair_sum_derivative(const FlowFixture& fx) {
  return timed("pair-sum derivative identity", [&](CheckResult& r) {
    const auto& recs = fx.trace.records;
    std::vector<double> t, s;
    for (std::size_t k = 0; k < recs.size(); ++k) {
      t.push_back(recs[k].t);
      s.push_back(pair_sq_sum_reference(fx.trace.snapshots[k].y));
    }
    double worst_fd = 0.0, worst_chain = 0.0;
    std::size_t worst_k = 0;
    for (std::size_t k = 0; k < recs.size(); ++k) {
      const double analytic = recs[k].pair_sq_sum_rate;
      const double fd = fd_derivative(t, s, k);
      const double chain = pair_sq_sum_rate_reference(fx.p.matrix(), fx.trace.snapshots[k].y);
      const double e_fd = std::abs(fd - analytic) / std::abs(analytic);
      const double e_chain = std::abs(chain - analytic) / std::abs(analytic);
      if (!(e_fd <= worst_fd)) {
        worst_fd = e_fd;
        worst_k = k;
      }
      worst_chain = std::max(worst_chain, e_chain);
    }
    r.passed = recs.size() >= 5 && worst_fd <= 1e-5 && worst_chain <= 1e-9;
    r.detail = std::to_string(fx.trace.steps) + " steps, " + std::to_string(recs.size()) +
               " records; max rel err vs finite differences " + sci(worst_fd) + " (at t = " +
               sci(recs.empty() ? 0.0 : recs[worst_k].t) + "), vs chain rule " + sci(worst_chain);
  });
}

CheckResult check_kl_monotone(const FlowFixture& fx) {
  return timed("KL monotone along the flow", [&](CheckResult& r) {
    const auto& recs = fx.trace.records;
    double worst_rise = -kInf, worst_gap = 0.0;
    std::size_t strict = 0;
    long double prev = 0;
    for (std::size_t k = 0; k < recs.size(); ++k) {
      const long double ref = kl_reference(fx.p.matrix(), fx.trace.snapshots[k].y);
      worst_gap = std::max(worst_gap, static_cast<double>(std::abs(ref - recs[k].kl)));
      if (k > 0) {
        worst_rise = std::max({worst_rise, recs[k].kl - recs[k - 1].kl,
                               static_cast<double>(ref - prev)});
        if (recs[k].kl < recs[k - 1].kl) ++strict;
      }
      prev = ref;
    }
    r.passed = worst_rise <= 1e-12 && worst_gap <= 1e-10;
    r.detail = "largest KL increase " + sci(worst_rise) + ", strict decreases " +
               std::to_string(strict) + "/" + std::to_string(recs.size() - 1) +
               ", |KL - reference| <= " + sci(worst_gap) + ", halvings " +
               std::to_string(fx.trace.halvings);
  });
}

CheckResult check_center_of_mass(const FlowFixture& fx) {
  return timed("center of mass conserved", [&](CheckResult& r) {
    double worst = 0.0;
    for (std::size_t k = 0; k < fx.trace.records.size(); ++k) {
      const auto& y = fx.trace.snapshots[k].y;
      long double cx = 0, cy = 0;
      for (const auto& pt : y) {
        cx += pt.x;
        cy += pt.y;
      }
      cx /= y.size();
      cy /= y.size();
      worst = std::max({worst, static_cast<double>(std::hypot(cx, cy)),
                        norm(fx.trace.records[k].com)});
    }
    r.passed = worst <= 1e-9;
    r.detail = "max |center of mass| " + sci(worst) + " over " +
               std::to_string(fx.trace.records.size()) + " records";
  });
}

struct Calibrated {
  std::string label;
  Dataset data;
  CondAffinity cond;
};

// Entropy is strictly increasing in sigma and hits its limits at the ends.
void entropy_profile(const Dataset& data, std::size_t i, double& worst_step, double& worst_limit,
                     std::size_t& grid_points) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t j = 0; j < data.size(); ++j)
    if (j != i) d.emplace_back(std::sqrt(data.sq_distance(i, j)), j);
  std::sort(d.begin(), d.end());
  const double d1 = d[0].first, d2 = d[1].first;
  const double lo = std::sqrt((d2 * d2 - d1 * d1) / 40.0);
  const double hi = 10.0 * data.diameter();
  double prev = -kInf;
  for (int k = 0; k < 50; ++k) {
    const double sigma = lo * std::pow(hi / lo, k / 49.0);
    const double h = entropy_reference(conditional_row(data, i, sigma));
    worst_step = std::min(worst_step, h - prev);
    prev = h;
    ++grid_points;
  }
  const double n1 = static_cast<double>(data.size() - 1);
  const double wide = entropy_reference(conditional_row(data, i, 1e6 * data.diameter()));
  const double narrow = entropy_reference(conditional_row(data, i, 1e-6 * (d2 - d1)));
  worst_limit = std::max({worst_limit, std::abs(wide - std::log(n1)), std::abs(narrow)});
}

CheckResult check_calibration(const std::vector<Calibrated>& sets) {
  return timed("perplexity calibration", [&](CheckResult& r) {
    double worst_perp = 0.0;
    for (const auto& c : sets) {
      for (std::size_t i = 0; i < c.cond.size(); ++i) {
        const double perp = std::exp(entropy_reference(c.cond.rows.row(i)));
        worst_perp = std::max(worst_perp, std::abs(perp - c.cond.perp_target) / c.cond.perp_target);
      }
    }
    double worst_step = kInf, worst_limit = 0.0;
    std::size_t grid_points = 0;
    for (const auto& c : sets) {
      // A handful of rows whose nearest neighbour is unique.
      for (std::size_t i = 0; i < c.data.size(); i += std::max<std::size_t>(1, c.data.size() / 5)) {
        if (nearest_tie_count(c.data, i) != 1) continue;
        entropy_profile(c.data, i, worst_step, worst_limit, grid_points);
      }
    }
    r.passed = worst_perp <= 1e-8 && worst_step > 0.0 && worst_limit <= 1e-6 && grid_points > 0;
    r.detail = std::to_string(sets.size()) + " calibrations, max rel perplexity err " +
               sci(worst_perp) + "; entropy grid: " + std::to_string(grid_points) +
               " points, min increment " + sci(worst_step) + ", limit err " + sci(worst_limit);
  });
}

CheckResult check_affinity_bounds(const std::vector<Calibrated>& sets) {
  return timed("affinity comparability bounds", [&](CheckResult& r) {
    std::size_t entries = 0, violations = 0;
    double worst_margin_gap = 0.0, min_margin = kInf;
    for (const auto& c : sets) {
      const auto rep = cp_bound_report(c.cond, c.data);
      const std::size_t n = c.data.size();
      const double sigma_min = *std::min_element(c.cond.sigmas.begin(), c.cond.sigmas.end());
      const double diam = oracle_diameter(c.data);
      const double log_cp = diam * diam / (2.0 * sigma_min * sigma_min);
      const double slack = 1e-12 * (1.0 + log_cp);
      std::vector<std::vector<double>> lc(n);
      for (std::size_t i = 0; i < n; ++i) lc[i] = log_cond_row_reference(c.data, i, c.cond.sigmas[i]);
      const double log_n1 = std::log(static_cast<double>(n - 1));
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          const double cond = log_n1 + lc[i][j];
          const double a = std::max(lc[i][j], lc[j][i]);
          const double b = std::min(lc[i][j], lc[j][i]);
          const double joint = log_n1 + a + std::log1p(std::exp(b - a)) - std::log(2.0);
          worst = std::max({worst, std::abs(cond), std::abs(joint)});
          if (std::abs(cond) > log_cp + slack) ++violations;
          if (std::abs(joint) > log_cp + slack) ++violations;
          entries += 2;
        }
      }
      min_margin = std::min(min_margin, log_cp - worst);
      worst_margin_gap = std::max(worst_margin_gap,
                                  std::abs(rep.margin - (log_cp - worst)) / (1.0 + log_cp));
    }
    r.passed = violations == 0 && worst_margin_gap <= 1e-9;
    r.detail = std::to_string(sets.size()) + " datasets, " + std::to_string(entries) +
               " scaled entries, violations " + std::to_string(violations) +
               ", min log-margin " + sci(min_margin) + ", report agreement " +
               sci(worst_margin_gap);
  });
}

CheckResult check_qprime(std::uint64_t seed, const FlowFixture* fx) {
  return timed("tail-kernel square-sum lower bound", [&](CheckResult& r) {
    std::mt19937_64 rng(seed * 7919 + 11);
    std::uniform_int_distribution<std::size_t> size(3, 64);
    std::size_t failures = 0, configs = 0;
    double min_ratio = kInf, worst_agree = 0.0;
    auto probe = [&](const std::vector<Point2>& y) {
      const std::size_t n = y.size();
      const double ln = std::log(static_cast<double>(n));
      const double bound = 1.0 / (4.0 * static_cast<double>(n) * ln * ln);
      const double ref = qprime_sq_sum_reference(y);
      const auto core = qprime_sq_sum_check(EmbeddingState{y, 0.0});
      worst_agree = std::max(worst_agree, std::abs(core.value - ref) / ref);
      min_ratio = std::min(min_ratio, ref / bound);
      if (!(ref >= bound)) ++failures;
      ++configs;
    };
    for (int k = 0; k < 1000; ++k) {
      probe(random_configuration(size(rng), static_cast<ConfigShape>(k % 3), rng));
    }
    std::size_t snaps = 0;
    if (fx) {
      for (const auto& s : fx->trace.snapshots) {
        probe(s.y);
        ++snaps;
      }
    }
    r.passed = failures == 0 && worst_agree <= 1e-10;
    r.detail = std::to_string(configs - snaps) + " random configurations + " +
               std::to_string(snaps) + " flow snapshots, failures " + std::to_string(failures) +
               ", min value/bound " + sci(min_ratio) + ", core vs reference " + sci(worst_agree);
  });
}

CheckResult check_upper_bound(std::uint64_t seed) {
  return timed("pair-sum derivative upper bound", [&](CheckResult& r) {
    std::mt19937_64 rng(seed * 104729 + 3);
    std::uniform_int_distribution<std::size_t> size(3, 32);
    std::uniform_real_distribution<double> log_scale(-2.0, 1.5);
    std::normal_distribution<double> gauss;
    std::size_t failures = 0, shrinking = 0, mismatch = 0;
    for (int k = 0; k < 1000; ++k) {
      const std::size_t n = size(rng);
      const Matrix pm = random_joint_affinity(n, rng);
      const SymAffinity p = SymAffinity::from_matrix(pm);
      const double scale = std::pow(10.0, log_scale(rng));
      std::vector<Point2> y(n);
      for (auto& pt : y) pt = {scale * gauss(rng), scale * gauss(rng)};
      const EmbeddingState state{y, 0.0};

      // Oracle bound 4n Σ (p^2 - q^2) Σ w, and the rate by the chain rule.
      long double z = 0, sq = 0, mag = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j) z += 1.0L / (1.0L + norm_sq(y[i] - y[j]));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          const long double w = 1.0L / (1.0L + norm_sq(y[i] - y[j]));
          const long double q = w / z;
          sq += static_cast<long double>(pm(i, j)) * pm(i, j) - q * q;
          mag += (pm(i, j) + q) * w;
        }
      }
      const double bound = static_cast<double>(4.0L * n * sq * z);
      const double rate = pair_sq_sum_rate_reference(pm, y);
      const double tol = 1e-9 * static_cast<double>(8.0L * n * mag);

      const auto core = derivative_upper_bound(p, state);
      if (std::abs(core.derivative - rate) > tol || std::abs(core.bound - bound) > tol) ++mismatch;
      if (!(rate <= bound + tol)) ++failures;
      if (sq < 0) {
        ++shrinking;
        if (!(rate < 0.0)) ++failures;
      }
    }
    r.passed = failures == 0 && mismatch == 0 && shrinking > 0;
    r.detail = "1000 instances, violations " + std::to_string(failures) + ", core/reference mismatches " +
               std::to_string(mismatch) + ", instances with sum p^2 < sum q^2: " +
               std::to_string(shrinking);
  });
}

struct BoundedRun {
  bool finite = true;
  bool radius_ok = false;
  bool formula_ok = false;
  bool condition = false;
  double log_cp = 0.0;
  double log_rn = 0.0;
  double max_norm = 0.0;
  double kl_drop = 0.0;
};

BoundedRun bounded_run(std::uint64_t seed, const FlowOptions& flow) {
  const Dataset data = circle(300, seed);
  const CondAffinity cond = calibrate(data, perplexity_from_zeta(data.size(), 0.1));
  const SymAffinity p = symmetrize(cond);
  const FlowTrace trace = integrate(p, gaussian_init(data.size(), seed), flow);
  const auto bounds = cp_bound_report(cond, data);
  const auto rn = boundedness_radius(p, trace.initial_kl, bounds.cp, data.size());

  BoundedRun out;
  out.log_cp = bounds.log_cp;
  out.condition = theorem_condition(data.size(), bounds.cp);
  // Independent evaluation of log R_n.
  long double ent = 0;
  for (double v : p.matrix().data())
    if (v > 0) ent += v * std::log(static_cast<long double>(v));
  const long double pairs = 300.0L * 299.0L;
  const long double log_rn_ref = 0.5L * std::log(2.0L) +
                                 0.5L * bounds.cp * pairs * (trace.initial_kl - ent);
  out.log_rn = rn.log_value;
  out.kl_drop = trace.initial_kl / trace.records.back().kl;
  out.formula_ok = std::isinf(rn.log_value)
                       ? std::isinf(static_cast<double>(log_rn_ref))
                       : std::abs(rn.log_value - static_cast<double>(log_rn_ref)) <=
                             1e-9 * std::abs(static_cast<double>(log_rn_ref));
  const auto check = check_radius(trace, rn.value);
  out.finite = check.all_finite;
  for (const auto& rec : trace.records) {
    out.max_norm = std::max(out.max_norm, rec.max_norm);
    if (!std::isfinite(rec.max_norm)) out.finite = false;
  }
  const auto tau = check.tau_index;
  bool in_log = true;
  if (tau) {
    for (std::size_t k = *tau + 1; k < trace.records.size(); ++k) {
      if (!(std::log(trace.records[k].max_norm) <= rn.log_value)) in_log = false;
    }
  }
  out.radius_ok = check.passed() && in_log;
  return out;
}

CheckResult check_boundedness(const SuiteOptions& opts) {
  return timed("flow stays bounded", [&](CheckResult& r) {
    std::vector<std::future<BoundedRun>> runs;
    // Long horizon so the runs actually minimise (KL falls by roughly 7x).
    FlowOptions flow = opts.flow;
    flow.step = 20.0;
    flow.t_end = 20000.0;
    flow.record_every = 10;
    flow.keep_snapshots = false;
    for (std::uint64_t s = 0; s < 10; ++s) {
      runs.push_back(std::async(std::launch::async, bounded_run, opts.seed + s, flow));
    }
    std::size_t ok = 0, conditions = 0;
    double max_norm = 0.0, min_log_cp = kInf, max_log_cp = 0.0, min_drop = kInf;
    for (auto& f : runs) {
      const auto run = f.get();
      if (run.finite && run.radius_ok && run.formula_ok) ++ok;
      if (run.condition) ++conditions;
      max_norm = std::max(max_norm, run.max_norm);
      min_drop = std::min(min_drop, run.kl_drop);
      min_log_cp = std::min(min_log_cp, run.log_cp);
      max_log_cp = std::max(max_log_cp, run.log_cp);
    }
    r.passed = ok == runs.size();
    r.detail = std::to_string(ok) + "/10 runs finite and within R_n, max |y| " + sci(max_norm) +
               ", KL reduced at least " + sci(min_drop) + "x" +
               ", log C_p in [" + sci(min_log_cp) + ", " + sci(max_log_cp) +
               "], theorem condition held in " + std::to_string(conditions) + "/10";
  });
}

Dataset random_cloud(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix m(n, d);
  for (auto& v : m.data()) v = gauss(rng);
  return Dataset::from_matrix(std::move(m));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

CheckResult check_w1(std::uint64_t seed) {
  return timed("exact W1 metric and convergence", [&](CheckResult& r) {
    std::mt19937_64 rng(seed * 31337 + 5);
    std::uniform_int_distribution<std::size_t> size(2, 64);
    std::normal_distribution<double> offset(0.0, 3.0);
    std::size_t axiom_failures = 0;
    for (int k = 0; k < 20; ++k) {
      const std::size_t n = size(rng);
      const auto a = random_cloud(n, 2, rng), b = random_cloud(n, 2, rng), c = random_cloud(n, 2, rng);
      const double ab = w1_exact(a, b).distance, ba = w1_exact(b, a).distance;
      const double ac = w1_exact(a, c).distance, cb = w1_exact(c, b).distance;
      if (w1_exact(a, a).distance != 0.0) ++axiom_failures;
      if (!(ab > 0.0)) ++axiom_failures;
      if (std::abs(ab - ba) > 1e-12 * (1.0 + ab)) ++axiom_failures;
      if (ab > ac + cb + 1e-12) ++axiom_failures;

      // Translation: every point moved by v.
      const double vx = offset(rng), vy = offset(rng);
      Matrix moved = a.points();
      for (std::size_t i = 0; i < n; ++i) {
        moved(i, 0) += vx;
        moved(i, 1) += vy;
      }
      const double shift = w1_exact(a, Dataset::from_matrix(std::move(moved))).distance;
      if (std::abs(shift - std::hypot(vx, vy)) > 1e-12 * (1.0 + std::hypot(vx, vy))) ++axiom_failures;
    }
    std::size_t brute_failures = 0;
    for (int k = 0; k < 20; ++k) {
      const std::size_t n = 2 + k % 6;
      const auto a = random_cloud(n, 3, rng), b = random_cloud(n, 3, rng);
      if (std::abs(w1_exact(a, b).distance - w1_brute_force(a, b)) > 1e-12) ++brute_failures;
    }

    const std::vector<std::size_t> ns{32, 64, 128, 256};
    std::vector<std::vector<double>> values(ns.size());
    for (std::uint64_t s = 0; s < 10; ++s) {
      ManifoldSpec spec;
      spec.seed = seed + s;
      const auto curve = w1_convergence_curve(spec, ns, 1024);
      for (std::size_t k = 0; k < ns.size(); ++k) values[k].push_back(curve[k].second);
    }
    std::vector<double> med;
    for (auto& v : values) med.push_back(median(v));
    bool decreasing = true;
    for (std::size_t k = 1; k < med.size(); ++k) decreasing = decreasing && med[k] <= med[k - 1];

    r.passed = axiom_failures == 0 && brute_failures == 0 && decreasing;
    std::string curve;
    for (std::size_t k = 0; k < ns.size(); ++k) {
      curve += (k ? ", " : "") + std::to_string(ns[k]) + ":" + sci(med[k]);
    }
    r.detail = "axiom/translation failures " + std::to_string(axiom_failures) +
               ", brute-force mismatches " + std::to_string(brute_failures) +
               ", median circle curve {" + curve + "}";
  });
}

CheckResult check_intrinsic_dim(std::uint64_t seed) {
  return timed("intrinsic dimension from kernel scaling", [&](CheckResult& r) {
    const auto c = circle(5000, seed);
    const std::vector<double> zc{std::cos(0.5), std::sin(0.5)};
    const double mc = estimate_intrinsic_dim(c, zc, scaling_regime_grid(c));

    const auto s = sphere(5000, seed);
    const double inv = 1.0 / std::sqrt(3.0);
    const std::vector<double> zs{inv, inv, inv};
    const double ms = estimate_intrinsic_dim(s, zs, scaling_regime_grid(s));
    r.passed = std::abs(mc - 1.0) <= 0.2 && std::abs(ms - 2.0) <= 0.3;
    r.detail = "circle slope " + sci(mc) + " (1 +- 0.2), sphere slope " + sci(ms) + " (2 +- 0.3)";
  });
}

CheckResult check_continuum_entropy(std::uint64_t seed) {
  return timed("continuum entropy trend and discrete gap", [&](CheckResult& r) {
    const auto data = circle(5000, seed);
    const std::size_t i = 0;
    const auto z = data.point(i);
    const auto grid = scaling_regime_grid(data, 20);
    // Walk sigma downwards from 0.1 diam; the negated entropy must keep rising.
    std::vector<double> sigmas;
    for (auto it = grid.rbegin(); it != grid.rend(); ++it)
      if (*it < 0.1 * data.diameter()) sigmas.push_back(*it);
    double prev = -kInf, min_rise = kInf;
    for (double sigma : sigmas) {
      const double neg = -continuum_entropy(data, z, sigma);
      min_rise = std::min(min_rise, neg - prev);
      prev = neg;
    }
    const double sigma = 0.1;
    const double discrete = entropy_reference(conditional_row(data, i, sigma)) -
                            std::log(static_cast<double>(data.size()));
    const double gap = std::abs(continuum_entropy(data, z, sigma) - discrete);
    r.passed = sigmas.size() >= 5 && min_rise > 0.0 && gap <= 0.1;
    r.detail = std::to_string(sigmas.size()) + " bandwidths below 0.1 diam, min rise " +
               sci(min_rise) + "; gap at sigma = 0.1: " + sci(gap);
  });
}

}  // namespace

CheckResult check_gradient_oracle(std::uint64_t seed, const GradientFn& gradient) {
  return timed("gradient vs finite differences", [&](CheckResult& r) {
    std::mt19937_64 rng(seed * 1000003 + 1);
    std::uniform_int_distribution<std::size_t> size(3, 16);
    std::normal_distribution<double> gauss;
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const std::size_t n = size(rng);
      const Matrix pm = random_joint_affinity(n, rng);
      const SymAffinity p = SymAffinity::from_matrix(pm);
      std::vector<Point2> y(n);
      for (auto& pt : y) pt = {gauss(rng), gauss(rng)};
      const auto g = gradient(p, EmbeddingState{y, 0.0});
      worst = std::max(worst, relative_max_error(g, gradient_fd(pm, y, 1e-6)));
    }
    r.passed = worst <= 1e-6;
    r.detail = "50 instances, max rel err " + sci(worst);
  });
}

std::vector<CheckResult> run_suite(const SuiteOptions& opts,
                                   const std::function<void(const CheckResult&)>& on_result) {
  std::vector<CheckResult> out;
  auto emit = [&](CheckResult r) {
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  };

  GradientFn grad = [&](const SymAffinity& p, const EmbeddingState& s) {
    auto g = kl_gradient(p, s);
    if (opts.flip_gradient_sign)
      for (auto& v : g) v *= -1.0;
    return g;
  };
  auto gradient_check = check_gradient_oracle(opts.seed, grad);
  if (gradient_check.passed && gradient_check.seconds >= 10.0) {
    gradient_check.passed = false;
    gradient_check.detail += "; over the 10 s budget";
  }
  emit(std::move(gradient_check));

  const std::size_t n_user = opts.data ? opts.data->size() : 0;
  const bool degenerate = opts.data && n_user < 3;

  std::optional<FlowFixture> fx;
  std::string fixture_error;
  double fixture_seconds = 0.0;
  if (!degenerate) {
    const auto start = Clock::now();
    try {
      fx = build_fixture(opts);
    } catch (const std::exception& e) {
      fixture_error = e.what();
    }
    fixture_seconds = seconds_since(start);
  }
  auto flow_check = [&](const std::string& name, auto&& fn) {
    if (degenerate) return skipped(name, degenerate_notice(n_user));
    if (!fx) {
      CheckResult r;
      r.name = name;
      r.detail = "flow setup failed: " + fixture_error;
      return r;
    }
    return fn(*fx);
  };

  auto derivative = flow_check("pair-sum derivative identity", check_pair_sum_derivative);
  derivative.seconds += fixture_seconds;
  if (derivative.passed && !derivative.skipped && derivative.seconds >= 30.0) {
    derivative.passed = false;
    derivative.detail += "; over the 30 s budget";
  }
  emit(std::move(derivative));
  emit(flow_check("KL monotone along the flow", check_kl_monotone));
  emit(flow_check("center of mass conserved", check_center_of_mass));

  std::vector<Calibrated> sets;
  std::string calib_error;
  if (!degenerate) {
    try {
      if (opts.data) {
        sets.push_back({"input", *opts.data, calibrate(*opts.data, resolve_perp(opts, n_user))});
      } else {
        for (double perp : {5.0, 10.0, 30.0}) {
          const auto c = circle(200, opts.seed);
          sets.push_back({"circle", c, calibrate(c, perp)});
          const auto s = sphere(200, opts.seed);
          sets.push_back({"sphere", s, calibrate(s, perp)});
        }
      }
      if (fx && !opts.data) sets.push_back({"flow", fx->data, fx->cond});
    } catch (const std::exception& e) {
      calib_error = e.what();
    }
  }
  auto calib_check = [&](const std::string& name, auto&& fn) {
    if (degenerate) return skipped(name, degenerate_notice(n_user));
    if (!calib_error.empty()) {
      CheckResult r;
      r.name = name;
      r.detail = "calibration failed: " + calib_error;
      return r;
    }
    return fn(sets);
  };
  emit(calib_check("perplexity calibration", check_calibration));
  emit(calib_check("affinity comparability bounds", check_affinity_bounds));

  emit(check_qprime(opts.seed, fx ? &*fx : nullptr));
  emit(check_upper_bound(opts.seed));
  emit(check_boundedness(opts));
  emit(check_w1(opts.seed));
  auto dim = check_intrinsic_dim(opts.seed);
  if (dim.passed && dim.seconds >= 60.0) {
    dim.passed = false;
    dim.detail += "; over the 60 s budget";
  }
  emit(std::move(dim));
  emit(check_continuum_entropy(opts.seed));
  return out;
}

std::string format_result(const CheckResult& r) {
  std::ostringstream os;
  os << (r.skipped ? "SKIP" : r.passed ? "PASS" : "FAIL") << "  " << r.name << "  ("
     << std::fixed << std::setprecision(2) << r.seconds << " s)  " << r.detail;
  return os.str();
}

}  // namespace tsneflow::checks
