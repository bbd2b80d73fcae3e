#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "tsneflow/embedding.hpp"
#include "tsneflow/error.hpp"
#include "tsneflow/high_affinity.hpp"

namespace tsneflow {

enum class FlowMethod { kRk4, kEuler };

std::string_view to_string(FlowMethod m);
FlowMethod parse_flow_method(std::string_view s);

struct FlowOptions {
  double step = 0.1;
  double t_end = 50.0;
  FlowMethod method = FlowMethod::kRk4;
  // Only used by the discrete momentum update.
  double eta = 200.0;
  double alpha = 0.0;
  std::size_t record_every = 1;
  bool keep_snapshots = false;

  /// Throws InvalidArgument unless step > 0, eta > 0, alpha in [0, 1),
  /// t_end >= 0 and record_every >= 1.
  void validate() const;
};

struct TraceRecord {
  double t = 0.0;
  double kl = 0.0;
  Point2 com;
  double pair_sq_sum = 0.0;       // S = Σ_{i≠j} |y_i - y_j|^2
  double pair_sq_sum_rate = 0.0;  // dS/dt from the closed form
  double max_norm = 0.0;
  double min_dist = 0.0;
  double max_dist = 0.0;
  double qprime_sq_sum = 0.0;     // NaN when two points coincide
};

struct FlowTrace {
  std::vector<TraceRecord> records;
  std::vector<EmbeddingState> snapshots;  // filled when keep_snapshots is set
  EmbeddingState final_state;
  double initial_kl = 0.0;
  std::size_t steps = 0;
  std::size_t halvings = 0;
};

/// Raised when the KL safeguard halves a step 40 times without a decrease.
class StepFailure : public Error {
 public:
  StepFailure(const std::string& message, EmbeddingState state);
  const EmbeddingState& state() const noexcept { return state_; }

 private:
  EmbeddingState state_;
};

/// C(Y) = Σ_{i≠j} p_ij log(p_ij / q_ij).
double kl_divergence(const SymAffinity& p, const EmbeddingState& state);

/// ∇_{y_i} C = 4 Σ_{j≠i} (p_ij - q_ij)(y_i - y_j)(1 + |y_i - y_j|^2)^-1.
/// Each pair's contribution is added to i and subtracted from j, so the rows
/// sum to zero up to rounding.
std::vector<Point2> kl_gradient(const SymAffinity& p, const EmbeddingState& state);

struct StepResult {
  EmbeddingState state;
  double kl_before = 0.0;
  double kl_after = 0.0;
  double h_used = 0.0;
  int halvings = 0;
};

/// One step of dy_i/dt = -∇_{y_i} C. A step that raises KL by more than 1e-12
/// is retried with half the step, at most 40 times, then StepFailure.
StepResult flow_step(const SymAffinity& p, const EmbeddingState& state, double h,
                     FlowMethod method = FlowMethod::kRk4);

/// Integrates the flow from `init` (recentred first) up to opts.t_end,
/// recording diagnostics at t = 0, every opts.record_every steps, and at the end.
FlowTrace integrate(const SymAffinity& p, const EmbeddingState& init, const FlowOptions& opts);

/// Classic update Y - eta ∇C(Y) + alpha (Y - Y_prev). No monotonicity guarantee.
EmbeddingState discrete_step(const SymAffinity& p, const EmbeddingState& state,
                             const EmbeddingState& prev_state, double eta, double alpha);

/// n i.i.d. N(0, stddev^2) points, recentred.
EmbeddingState gaussian_init(std::size_t n, std::uint64_t seed, double stddev = 1e-2);

/// CSV with header t,kl,com_x,com_y,S,dSdt_analytic,max_norm,min_dist,max_dist.
void write_trace_csv(std::ostream& out, const FlowTrace& trace);
void write_trace_csv_file(const std::filesystem::path& path, const FlowTrace& trace);

}  // namespace tsneflow
