#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace manifoldrank {

/// Machine-readable failure codes. Every thrown Error carries one.
enum class ErrorCode {
  NegativeScore,
  UnmappedItem,
  CandidateTooSmall,
  InvalidParams,
  NonFiniteResult,
  NonFiniteGradient,
  UnsupportedPreset,
  AllZeroScores,
  SessionExhausted,
  InstanceTooLarge,
  ZeroIdealGain,
  AllZero,
  DegenerateT,
  InvalidUtility,
  InvalidGrid,
  SingularDesign,
  InvalidSpec,
  ParseError,
  DuplicateTriplet,
  NonFiniteScore,
  InvalidConfig,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace manifoldrank
