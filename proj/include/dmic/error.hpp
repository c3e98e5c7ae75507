#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dmic {

enum class Errc {
  InvalidArgument,
  NonFinite,
  NonSquare,
  Singular,
  RankMismatch,
  ShapeMismatch,
  TooLarge,
  DegenerateInput,
  SingularIteration,
  AllEqual,
  DegenerateRank,
  UnansweredTask,
  InsufficientTasks,
  LeaveOneOutUnanswered,
  DeadOption,
  RankDeficient,
  EmptyGold,
  MissingOption,
  ZeroConditional,
  DegenerateSpectrum,
  NonConvergence,
  InfeasibleAssignment,
  ParseError,
  SchemaViolation,
  UnknownFixture,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library. The code is stable and is what the
/// CLI maps to exit statuses; the message carries the offending indices.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dmic
