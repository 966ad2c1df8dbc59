#include "relaycap/error.hpp"

namespace relaycap {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::EmptyContourGap: return "EmptyContourGap";
    case ErrorCode::PoleAtNonPositiveInteger: return "PoleAtNonPositiveInteger";
    case ErrorCode::ContourNotConverged: return "ContourNotConverged";
    case ErrorCode::IntegrandOverflow: return "IntegrandOverflow";
    case ErrorCode::ContourAbscissaTooLarge: return "ContourAbscissaTooLarge";
    case ErrorCode::Divergent: return "Divergent";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::UnsupportedHForm: return "UnsupportedHForm";
    case ErrorCode::SeriesTruncationRequired: return "SeriesTruncationRequired";
    case ErrorCode::GridResolutionInsufficient: return "GridResolutionInsufficient";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::RootNotBracketed: return "RootNotBracketed";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace relaycap
