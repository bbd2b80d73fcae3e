#include "tsneflow/error.hpp"

#include <utility>

namespace tsneflow {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::kNonFiniteInput: return "NonFiniteInput";
    case Errc::kDuplicatePoints: return "DuplicatePoints";
    case Errc::kInvalidDataset: return "InvalidDataset";
    case Errc::kPerpOutOfRange: return "PerpOutOfRange";
    case Errc::kDegenerateDistances: return "DegenerateDistances";
    case Errc::kBracketFailure: return "BracketFailure";
    case Errc::kBoundViolated: return "BoundViolated";
    case Errc::kCoincidentPoints: return "CoincidentPoints";
    case Errc::kStepFailure: return "StepFailure";
    case Errc::kSizeMismatch: return "SizeMismatch";
    case Errc::kTooLarge: return "TooLarge";
    case Errc::kBadSpec: return "BadSpec";
    case Errc::kDegenerateGrid: return "DegenerateGrid";
    case Errc::kParse: return "ParseError";
    case Errc::kIo: return "IoError";
    case Errc::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {

std::string decorate(Errc code, const std::string& module, const std::string& message,
                     std::optional<std::size_t> index, std::optional<std::size_t> index2) {
  std::string out = module + ": " + std::string(to_string(code)) + ": " + message;
  if (index) {
    out += " (index " + std::to_string(*index);
    if (index2) out += ", " + std::to_string(*index2);
    out += ")";
  }
  return out;
}

}  // namespace

Error::Error(Errc code, std::string module, const std::string& message,
             std::optional<std::size_t> index, std::optional<std::size_t> index2)
    : std::runtime_error(decorate(code, module, message, index, index2)),
      code_(code),
      module_(std::move(module)),
      index_(index),
      index2_(index2) {}

}  // namespace tsneflow
