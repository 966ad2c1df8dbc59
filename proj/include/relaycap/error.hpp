#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace relaycap {

enum class ErrorCode {
  InvalidOrder,
  NonPositiveScale,
  EmptyContourGap,
  PoleAtNonPositiveInteger,
  ContourNotConverged,
  IntegrandOverflow,
  ContourAbscissaTooLarge,
  Divergent,
  InvalidParameter,
  NotNormalized,
  UnsupportedHForm,
  SeriesTruncationRequired,
  GridResolutionInsufficient,
  QuadratureNotConverged,
  RootNotBracketed,
  InsufficientSamples,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace relaycap
