#include "manifoldrank/error.hpp"

namespace manifoldrank {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NegativeScore: return "NegativeScore";
    case ErrorCode::UnmappedItem: return "UnmappedItem";
    case ErrorCode::CandidateTooSmall: return "CandidateTooSmall";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NonFiniteResult: return "NonFiniteResult";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::UnsupportedPreset: return "UnsupportedPreset";
    case ErrorCode::AllZeroScores: return "AllZeroScores";
    case ErrorCode::SessionExhausted: return "SessionExhausted";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::ZeroIdealGain: return "ZeroIdealGain";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::DegenerateT: return "DegenerateT";
    case ErrorCode::InvalidUtility: return "InvalidUtility";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateTriplet: return "DuplicateTriplet";
    case ErrorCode::NonFiniteScore: return "NonFiniteScore";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace manifoldrank
