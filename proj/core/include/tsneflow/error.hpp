#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tsneflow {

enum class Errc {
  kNonFiniteInput,
  kDuplicatePoints,
  kInvalidDataset,
  kPerpOutOfRange,
  kDegenerateDistances,
  kBracketFailure,
  kBoundViolated,
  kCoincidentPoints,
  kStepFailure,
  kSizeMismatch,
  kTooLarge,
  kBadSpec,
  kDegenerateGrid,
  kParse,
  kIo,
  kInvalidArgument,
};

std::string_view to_string(Errc code);

/// Error raised by every module. Carries the module name and, where it
/// applies, the offending point index (and a second index for pairs).
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string module, const std::string& message,
        std::optional<std::size_t> index = std::nullopt,
        std::optional<std::size_t> index2 = std::nullopt);

  Errc code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }
  std::optional<std::size_t> index() const noexcept { return index_; }
  std::optional<std::size_t> index2() const noexcept { return index2_; }

 private:
  Errc code_;
  std::string module_;
  std::optional<std::size_t> index_;
  std::optional<std::size_t> index2_;
};

}  // namespace tsneflow
