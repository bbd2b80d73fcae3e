#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "tsneflow/geometry.hpp"
#include "tsneflow/kl_flow.hpp"

namespace tsneflow::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitModule = 4,
};

struct RunConfig {
  std::optional<std::filesystem::path> input;
  std::optional<ManifoldKind> manifold;
  std::size_t n = 0;
  std::optional<std::size_t> dim;  // ambient dimension for sampled data
  std::optional<double> perp;
  std::optional<double> zeta;
  FlowOptions flow;
  std::uint64_t seed = 0;
  std::filesystem::path out = "tsneflow-out";
  bool flip_gradient_sign = false;  // verify-only test hook
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Applies flat `key = value` lines (blank lines and '#' comments ignored) on
/// top of `cfg`. Keys: input, manifold, n, dim, perp, zeta, t_end, step,
/// method, seed, out, record_every.
void apply_config_text(std::istream& in, RunConfig& cfg);
void apply_config_file(const std::filesystem::path& path, RunConfig& cfg);

/// Checks the source and perplexity settings. `need_source` is false for
/// verify, which has a built-in default dataset.
void validate(const RunConfig& cfg, bool need_source);

/// Writes dataset.csv (sampled data only), trace.csv, report.json and
/// embedding.svg into cfg.out. Errors become a JSON object on `err`.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Runs the check suite and prints one line per check.
int verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// One-line {"error": {...}} object with kind, module, message, exit_code
/// and the index fields (null when absent).
void write_error_json(std::ostream& err, int exit_code, std::string_view kind,
                      std::string_view module, const std::string& message,
                      std::optional<std::size_t> index = std::nullopt,
                      std::optional<std::size_t> index2 = std::nullopt);

/// Static scatter in the unit square, fixed precision.
std::string embedding_svg(const EmbeddingState& state);

}  // namespace tsneflow::cli
