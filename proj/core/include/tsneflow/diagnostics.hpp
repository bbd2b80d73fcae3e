#pragma once

#include <cstddef>
#include <optional>

#include <nlohmann/json.hpp>

#include "tsneflow/dataset.hpp"
#include "tsneflow/embedding.hpp"
#include "tsneflow/high_affinity.hpp"
#include "tsneflow/kl_flow.hpp"

namespace tsneflow {

/// S = Σ_{i≠j} |y_i - y_j|^2 over ordered pairs, via 2n Σ |y_i - ȳ|^2.
double pairwise_sq_sum(const EmbeddingState& state);

/// Prefactor c(n) in dS/dt = c(n) Σ_{i≠j} (p_ij - q_ij)(1 + |y_i - y_j|^2)^-1.
/// Follows from S = 2n Σ|y_i|^2 - 2|Σ y_i|^2 and the flow; c(3) = 24.
double pair_sum_rate_prefactor(std::size_t n) noexcept;

/// dS/dt along the flow, from the closed form (no time stepping).
double pairwise_sq_sum_derivative(const SymAffinity& p, const EmbeddingState& state);

struct DerivativeBound {
  double derivative = 0.0;
  double bound = 0.0;
};

/// Upper bound (c(n)/2) Σ (p_ij^2 - q_ij^2) Σ_{k≠l} (1 + |y_k - y_l|^2)^-1 on dS/dt,
/// from p q <= (p^2 + q^2)/2. When Σp^2 < Σq^2 the pair sum must shrink.
/// Throws BoundViolated if the derivative exceeds it by more than 1e-12.
DerivativeBound derivative_upper_bound(const SymAffinity& p, const EmbeddingState& state);

struct RatioConstant {
  double value = 0.0;
  double log_value = 0.0;
};

/// D = √2 exp((c0 - Σ p log p) / (2 min p_ij)): bound on the ratio of any two
/// embedded distances once all of them exceed 1 and KL <= c0.
RatioConstant ratio_constant_D(const SymAffinity& p, double c0);

/// max_{i≠j} |y_i - y_j| / min_{k≠l} |y_k - y_l|.
double observed_distance_ratio(const EmbeddingState& state);

/// R_n = √2 exp((cp/2) n (n-1) (c0 - Σ p log p)).
RatioConstant boundedness_radius(const SymAffinity& p, double c0, double cp, std::size_t n);

/// (n-1) / (log n)^2 >= 8 cp^2.
bool theorem_condition(std::size_t n, double cp);

/// First recorded index with dS/dt >= 0, if any.
std::optional<std::size_t> detect_tau_index(const FlowTrace& trace);

struct RadiusCheck {
  std::optional<std::size_t> tau_index;
  std::size_t checked = 0;
  std::size_t violations = 0;
  bool all_finite = true;
  double max_norm_after_tau = 0.0;

  bool passed() const noexcept { return all_finite && violations == 0; }
};

/// Every record strictly after the detected tau must satisfy max |y_i| <= radius.
RadiusCheck check_radius(const FlowTrace& trace, double radius);

/// Largest |center of mass| over the recorded times.
double max_center_drift(const FlowTrace& trace);

struct TheoryReport {
  double c_p = 1.0;
  double log_c_p = 0.0;
  double sigma_floor = 0.0;
  double d = 0.0;
  double log_d = 0.0;
  double r_n = 0.0;
  double log_r_n = 0.0;
  bool theorem_condition = false;
  double qprime_margin = 0.0;  // min over records of Σq'^2 - 1/(4n(log n)^2)
  double entropy_term = 0.0;   // Σ p log p
  double c_0 = 0.0;            // KL at t = 0
  double final_kl = 0.0;
  std::size_t n = 0;
  double observed_distance_ratio = 0.0;  // at the final state
  bool min_dist_above_one_throughout = false;
  std::size_t records_with_min_dist_above_one = 0;
  std::optional<std::size_t> tau_index;
  bool radius_check_passed = false;
  double affinity_bound_margin = 0.0;
};

TheoryReport build_theory_report(const Dataset& data, const CondAffinity& cond,
                                 const SymAffinity& p, const FlowTrace& trace);

/// JSON object; non-finite values are written as null next to their logs.
nlohmann::json to_json(const TheoryReport& report);

}  // namespace tsneflow
