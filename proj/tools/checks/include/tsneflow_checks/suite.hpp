#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tsneflow/dataset.hpp"
#include "tsneflow/embedding.hpp"
#include "tsneflow/high_affinity.hpp"
#include "tsneflow/kl_flow.hpp"

namespace tsneflow::checks {

struct CheckResult {
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
  double seconds = 0.0;
};

using GradientFn = std::function<std::vector<Point2>(const SymAffinity&, const EmbeddingState&)>;

struct SuiteOptions {
  // When set, the dataset-driven checks run on this data instead of the
  // built-in circle (n = 100) and the n = 200 calibration sets.
  std::optional<Dataset> data;
  std::optional<double> perp;
  std::optional<double> zeta;
  FlowOptions flow;
  std::uint64_t seed = 1;
  // Test hook: negates the gradient handed to the gradient oracle.
  bool flip_gradient_sign = false;
};

/// The twelve checks, in order. `on_result` (if set) is called as each one
/// finishes.
std::vector<CheckResult> run_suite(const SuiteOptions& opts,
                                   const std::function<void(const CheckResult&)>& on_result = {});

CheckResult check_gradient_oracle(std::uint64_t seed, const GradientFn& gradient);

std::string format_result(const CheckResult& r);

}  // namespace tsneflow::checks
