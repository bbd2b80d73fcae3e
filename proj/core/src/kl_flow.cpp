#include "tsneflow/kl_flow.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>

#include "tsneflow/diagnostics.hpp"
#include "tsneflow/student_affinity.hpp"

namespace tsneflow {

namespace {

constexpr const char* kModule = "kl-flow";
constexpr double kKlSlack = 1e-12;
constexpr int kMaxHalvings = 40;

void require_same_size(const SymAffinity& p, const EmbeddingState& state) {
  if (p.size() != state.size()) {
    throw Error(Errc::kSizeMismatch, kModule, "affinity and embedding sizes differ");
  }
}

std::vector<Point2> velocity(const SymAffinity& p, const EmbeddingState& state) {
  auto g = kl_gradient(p, state);
  for (auto& v : g) v *= -1.0;
  return g;
}

EmbeddingState shifted(const EmbeddingState& base, const std::vector<Point2>& dir, double h) {
  EmbeddingState out{base.y, base.t};
  for (std::size_t i = 0; i < out.y.size(); ++i) out.y[i] += h * dir[i];
  return out;
}

EmbeddingState advance(const SymAffinity& p, const EmbeddingState& state, double h,
                       FlowMethod method) {
  if (method == FlowMethod::kEuler) {
    auto out = shifted(state, velocity(p, state), h);
    out.t = state.t + h;
    return out;
  }
  const auto k1 = velocity(p, state);
  const auto k2 = velocity(p, shifted(state, k1, 0.5 * h));
  const auto k3 = velocity(p, shifted(state, k2, 0.5 * h));
  const auto k4 = velocity(p, shifted(state, k3, h));
  EmbeddingState out{state.y, state.t + h};
  for (std::size_t i = 0; i < out.y.size(); ++i) {
    out.y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

StepResult safeguarded_step(const SymAffinity& p, const EmbeddingState& state, double h,
                            FlowMethod method, double kl_before) {
  double h_try = h;
  for (int halvings = 0; halvings <= kMaxHalvings; ++halvings) {
    auto next = advance(p, state, h_try, method);
    const double kl_after = kl_divergence(p, next);
    if (kl_after <= kl_before + kKlSlack) {
      return StepResult{std::move(next), kl_before, kl_after, h_try, halvings};
    }
    h_try *= 0.5;
  }
  throw StepFailure("KL kept increasing after " + std::to_string(kMaxHalvings) +
                        " step halvings at t = " + std::to_string(state.t),
                    state);
}

TraceRecord make_record(const SymAffinity& p, const EmbeddingState& state, double kl) {
  TraceRecord r;
  r.t = state.t;
  r.kl = kl;
  r.com = center_of_mass(state.y);
  r.pair_sq_sum = pairwise_sq_sum(state);
  r.pair_sq_sum_rate = pairwise_sq_sum_derivative(p, state);
  double min_d2 = std::numeric_limits<double>::infinity();
  double max_d2 = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    r.max_norm = std::max(r.max_norm, norm(state.y[i]));
    for (std::size_t j = i + 1; j < state.size(); ++j) {
      const double d2 = norm_sq(state.y[i] - state.y[j]);
      min_d2 = std::min(min_d2, d2);
      max_d2 = std::max(max_d2, d2);
    }
  }
  r.min_dist = std::sqrt(min_d2);
  r.max_dist = std::sqrt(max_d2);
  r.qprime_sq_sum = min_d2 > 0.0 ? qprime_sq_sum_check(state).value
                                 : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace

std::string_view to_string(FlowMethod m) {
  return m == FlowMethod::kRk4 ? "rk4" : "euler";
}

FlowMethod parse_flow_method(std::string_view s) {
  if (s == "rk4") return FlowMethod::kRk4;
  if (s == "euler") return FlowMethod::kEuler;
  throw Error(Errc::kInvalidArgument, kModule, "unknown method '" + std::string(s) + "'");
}

void FlowOptions::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(Errc::kInvalidArgument, kModule, "step must be positive");
  }
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw Error(Errc::kInvalidArgument, kModule, "t_end must be non-negative");
  }
  if (!(eta > 0.0)) throw Error(Errc::kInvalidArgument, kModule, "eta must be positive");
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw Error(Errc::kInvalidArgument, kModule, "alpha must lie in [0, 1)");
  }
  if (record_every == 0) {
    throw Error(Errc::kInvalidArgument, kModule, "record_every must be at least 1");
  }
}

StepFailure::StepFailure(const std::string& message, EmbeddingState state)
    : Error(Errc::kStepFailure, kModule, message), state_(std::move(state)) {}

double kl_divergence(const SymAffinity& p, const EmbeddingState& state) {
  require_same_size(p, state);
  const std::size_t n = state.size();
  double z_half = 0.0;
  double cross = 0.0;  // Σ p_ij (log p_ij - log w_ij) over unordered pairs
  double mass_half = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d2 = norm_sq(state.y[i] - state.y[j]);
      z_half += 1.0 / (1.0 + d2);
      const double pij = p(i, j);
      if (pij > 0.0) {
        cross += pij * (std::log(pij) + std::log1p(d2));
        mass_half += pij;
      }
    }
  }
  return 2.0 * cross + 2.0 * mass_half * std::log(2.0 * z_half);
}

std::vector<Point2> kl_gradient(const SymAffinity& p, const EmbeddingState& state) {
  require_same_size(p, state);
  const std::size_t n = state.size();
  std::vector<double> w(n * (n - 1) / 2);
  double z_half = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      w[k] = 1.0 / (1.0 + norm_sq(state.y[i] - state.y[j]));
      z_half += w[k];
    }
  }
  const double inv_z = 1.0 / (2.0 * z_half);
  std::vector<Point2> g(n);
  k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const double coeff = 4.0 * (p(i, j) - w[k] * inv_z) * w[k];
      const Point2 f = coeff * (state.y[i] - state.y[j]);
      g[i] += f;
      g[j] -= f;
    }
  }
  return g;
}

StepResult flow_step(const SymAffinity& p, const EmbeddingState& state, double h,
                     FlowMethod method) {
  if (!(h > 0.0)) throw Error(Errc::kInvalidArgument, kModule, "step must be positive");
  return safeguarded_step(p, state, h, method, kl_divergence(p, state));
}

FlowTrace integrate(const SymAffinity& p, const EmbeddingState& init, const FlowOptions& opts) {
  opts.validate();
  require_same_size(p, init);

  FlowTrace trace;
  EmbeddingState state = init;
  recenter(state.y);
  double kl = kl_divergence(p, state);
  trace.initial_kl = kl;
  auto record = [&] {
    trace.records.push_back(make_record(p, state, kl));
    if (opts.keep_snapshots) trace.snapshots.push_back(state);
  };
  record();

  const double t_stop = init.t + opts.t_end;
  const double eps = 1e-9 * opts.step;
  std::size_t since_record = 0;
  while (t_stop - state.t > eps) {
    const double h = std::min(opts.step, t_stop - state.t);
    auto res = safeguarded_step(p, state, h, opts.method, kl);
    state = std::move(res.state);
    kl = res.kl_after;
    ++trace.steps;
    trace.halvings += static_cast<std::size_t>(res.halvings);
    if (++since_record == opts.record_every || t_stop - state.t <= eps) {
      record();
      since_record = 0;
    }
  }
  trace.final_state = std::move(state);
  return trace;
}

EmbeddingState discrete_step(const SymAffinity& p, const EmbeddingState& state,
                             const EmbeddingState& prev_state, double eta, double alpha) {
  if (!(eta > 0.0)) throw Error(Errc::kInvalidArgument, kModule, "eta must be positive");
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw Error(Errc::kInvalidArgument, kModule, "alpha must lie in [0, 1)");
  }
  if (prev_state.size() != state.size()) {
    throw Error(Errc::kSizeMismatch, kModule, "previous state has a different size");
  }
  const auto g = kl_gradient(p, state);
  EmbeddingState out{state.y, state.t + eta};
  for (std::size_t i = 0; i < out.y.size(); ++i) {
    out.y[i] += -eta * g[i] + alpha * (state.y[i] - prev_state.y[i]);
  }
  return out;
}

EmbeddingState gaussian_init(std::size_t n, std::uint64_t seed, double stddev) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, stddev);
  EmbeddingState s;
  s.y.resize(n);
  for (auto& pt : s.y) {
    pt.x = gauss(rng);
    pt.y = gauss(rng);
  }
  recenter(s.y);
  return s;
}

void write_trace_csv(std::ostream& out, const FlowTrace& trace) {
  out << "t,kl,com_x,com_y,S,dSdt_analytic,max_norm,min_dist,max_dist\n";
  char buf[64];
  auto put = [&](double v, bool last) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, ptr - buf);
    out << (last ? '\n' : ',');
  };
  for (const auto& r : trace.records) {
    put(r.t, false);
    put(r.kl, false);
    put(r.com.x, false);
    put(r.com.y, false);
    put(r.pair_sq_sum, false);
    put(r.pair_sq_sum_rate, false);
    put(r.max_norm, false);
    put(r.min_dist, false);
    put(r.max_dist, true);
  }
}

void write_trace_csv_file(const std::filesystem::path& path, const FlowTrace& trace) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::kIo, kModule, "cannot write " + path.string());
  write_trace_csv(out, trace);
}

}  // namespace tsneflow
