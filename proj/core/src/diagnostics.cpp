#include "tsneflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tsneflow/error.hpp"
#include "tsneflow/student_affinity.hpp"

namespace tsneflow {

namespace {

constexpr const char* kModule = "diagnostics";

void require_same_size(const SymAffinity& p, const EmbeddingState& state) {
  if (p.size() != state.size()) {
    throw Error(Errc::kSizeMismatch, kModule, "affinity and embedding sizes differ");
  }
}

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

double pairwise_sq_sum(const EmbeddingState& state) {
  const Point2 c = center_of_mass(state.y);
  double acc = 0.0;
  for (const auto& y : state.y) acc += norm_sq(y - c);
  return 2.0 * static_cast<double>(state.size()) * acc;
}

double pair_sum_rate_prefactor(std::size_t n) noexcept { return 8.0 * static_cast<double>(n); }

double pairwise_sq_sum_derivative(const SymAffinity& p, const EmbeddingState& state) {
  require_same_size(p, state);
  const auto k = StudentKernel::compute(state);
  const std::size_t n = state.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      acc += (p(i, j) - k.w(i, j) / k.z) * k.w(i, j);
    }
  }
  return pair_sum_rate_prefactor(n) * 2.0 * acc;
}

DerivativeBound derivative_upper_bound(const SymAffinity& p, const EmbeddingState& state) {
  require_same_size(p, state);
  const auto k = StudentKernel::compute(state);
  const std::size_t n = state.size();
  double rate = 0.0;
  double squares = 0.0;  // Σ (p^2 - q^2) over unordered pairs
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double q = k.w(i, j) / k.z;
      rate += (p(i, j) - q) * k.w(i, j);
      squares += (p(i, j) - q) * (p(i, j) + q);
    }
  }
  const double c = pair_sum_rate_prefactor(n);
  DerivativeBound out{c * 2.0 * rate, 0.5 * c * 2.0 * squares * k.z};
  if (out.derivative > out.bound + 1e-12 * std::max(1.0, std::fabs(out.bound))) {
    throw Error(Errc::kBoundViolated, kModule, "pair-sum derivative exceeds its upper bound");
  }
  return out;
}

RatioConstant ratio_constant_D(const SymAffinity& p, double c0) {
  const double exponent = (c0 - p.entropy_term()) / (2.0 * p.min_entry());
  const double log_d = 0.5 * std::log(2.0) + exponent;
  return {std::exp(log_d), log_d};
}

double observed_distance_ratio(const EmbeddingState& state) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    for (std::size_t j = i + 1; j < state.size(); ++j) {
      const double d2 = norm_sq(state.y[i] - state.y[j]);
      lo = std::min(lo, d2);
      hi = std::max(hi, d2);
    }
  }
  return std::sqrt(hi / lo);
}

RatioConstant boundedness_radius(const SymAffinity& p, double c0, double cp, std::size_t n) {
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1);
  const double log_r = 0.5 * std::log(2.0) + 0.5 * cp * pairs * (c0 - p.entropy_term());
  return {std::exp(log_r), log_r};
}

bool theorem_condition(std::size_t n, double cp) {
  const double log_n = std::log(static_cast<double>(n));
  return static_cast<double>(n - 1) / (log_n * log_n) >= 8.0 * cp * cp;
}

std::optional<std::size_t> detect_tau_index(const FlowTrace& trace) {
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    if (trace.records[k].pair_sq_sum_rate >= 0.0) return k;
  }
  return std::nullopt;
}

RadiusCheck check_radius(const FlowTrace& trace, double radius) {
  RadiusCheck out;
  for (const auto& r : trace.records) {
    if (!std::isfinite(r.max_norm)) out.all_finite = false;
  }
  out.tau_index = detect_tau_index(trace);
  if (!out.tau_index) return out;
  for (std::size_t k = *out.tau_index + 1; k < trace.records.size(); ++k) {
    const double m = trace.records[k].max_norm;
    out.max_norm_after_tau = std::max(out.max_norm_after_tau, m);
    ++out.checked;
    if (!(m <= radius)) ++out.violations;
  }
  return out;
}

double max_center_drift(const FlowTrace& trace) {
  double worst = 0.0;
  for (const auto& r : trace.records) worst = std::max(worst, norm(r.com));
  return worst;
}

TheoryReport build_theory_report(const Dataset& data, const CondAffinity& cond,
                                 const SymAffinity& p, const FlowTrace& trace) {
  TheoryReport rep;
  rep.n = data.size();
  const auto bounds = cp_bound_report(cond, data);
  rep.sigma_floor = bounds.sigma_floor;
  rep.log_c_p = bounds.log_cp;
  rep.c_p = bounds.cp;
  rep.affinity_bound_margin = bounds.margin;
  rep.c_0 = trace.initial_kl;
  rep.final_kl = trace.records.empty() ? trace.initial_kl : trace.records.back().kl;
  rep.entropy_term = p.entropy_term();

  const auto d = ratio_constant_D(p, rep.c_0);
  rep.d = d.value;
  rep.log_d = d.log_value;
  const auto r = boundedness_radius(p, rep.c_0, rep.c_p, rep.n);
  rep.r_n = r.value;
  rep.log_r_n = r.log_value;
  rep.theorem_condition = theorem_condition(rep.n, rep.c_p);

  const double log_n = std::log(static_cast<double>(rep.n));
  const double q_bound = 1.0 / (4.0 * static_cast<double>(rep.n) * log_n * log_n);
  rep.qprime_margin = std::numeric_limits<double>::infinity();
  for (const auto& rec : trace.records) {
    if (std::isfinite(rec.qprime_sq_sum)) {
      rep.qprime_margin = std::min(rep.qprime_margin, rec.qprime_sq_sum - q_bound);
    }
    if (rec.min_dist > 1.0) ++rep.records_with_min_dist_above_one;
  }
  rep.min_dist_above_one_throughout =
      !trace.records.empty() && rep.records_with_min_dist_above_one == trace.records.size();
  rep.observed_distance_ratio = observed_distance_ratio(trace.final_state);
  rep.tau_index = detect_tau_index(trace);
  rep.radius_check_passed = check_radius(trace, rep.r_n).passed();
  return rep;
}

nlohmann::json to_json(const TheoryReport& r) {
  nlohmann::json j;
  j["C_p"] = finite_or_null(r.c_p);
  j["log_C_p"] = finite_or_null(r.log_c_p);
  j["sigma_floor"] = r.sigma_floor;
  j["D"] = finite_or_null(r.d);
  j["log_D"] = finite_or_null(r.log_d);
  j["R_n"] = finite_or_null(r.r_n);
  j["log_R_n"] = finite_or_null(r.log_r_n);
  j["theorem_condition"] = r.theorem_condition;
  j["qprime_margin"] = finite_or_null(r.qprime_margin);
  j["entropy_term"] = r.entropy_term;
  j["C_0"] = r.c_0;
  j["final_kl"] = r.final_kl;
  j["n"] = r.n;
  j["observed_distance_ratio"] = finite_or_null(r.observed_distance_ratio);
  j["min_dist_above_one_throughout"] = r.min_dist_above_one_throughout;
  j["records_with_min_dist_above_one"] = r.records_with_min_dist_above_one;
  j["tau_index"] = r.tau_index ? nlohmann::json(*r.tau_index) : nlohmann::json(nullptr);
  j["radius_check_passed"] = r.radius_check_passed;
  j["affinity_bound_margin"] = finite_or_null(r.affinity_bound_margin);
  return j;
}

}  // namespace tsneflow
