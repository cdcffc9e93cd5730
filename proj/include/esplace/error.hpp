#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace esplace {

enum class ErrorCode {
  NegativeLength,
  EmptySpeedRange,
  DegenerateProbability,
  ZeroEpsilon,
  InvalidParameter,
  NonPositiveSpacing,
  UnknownServer,
  InvalidWindow,
  SpacingBelowRange,
  NonPositiveDelta,
  UnreachableTarget,
  MissingKey,
  UnknownKey,
  TypeError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeLength: return "NegativeLength";
    case ErrorCode::EmptySpeedRange: return "EmptySpeedRange";
    case ErrorCode::DegenerateProbability: return "DegenerateProbability";
    case ErrorCode::ZeroEpsilon: return "ZeroEpsilon";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::NonPositiveSpacing: return "NonPositiveSpacing";
    case ErrorCode::UnknownServer: return "UnknownServer";
    case ErrorCode::InvalidWindow: return "InvalidWindow";
    case ErrorCode::SpacingBelowRange: return "SpacingBelowRange";
    case ErrorCode::NonPositiveDelta: return "NonPositiveDelta";
    case ErrorCode::UnreachableTarget: return "UnreachableTarget";
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::TypeError: return "TypeError";
  }
  return "Unknown";
}

// Single failure with a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct Violation {
  ErrorCode code;
  std::string message;
};

// Thrown by parameter validation; carries every violated constraint, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations)
      : Error(violations.empty() ? ErrorCode::InvalidParameter : violations.front().code,
              join(violations)),
        violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const noexcept { return violations_; }

  bool has(ErrorCode code) const noexcept {
    for (const auto& v : violations_)
      if (v.code == code) return true;
    return false;
  }

 private:
  static std::string join(const std::vector<Violation>& vs) {
    std::string out;
    for (const auto& v : vs) {
      if (!out.empty()) out += "; ";
      out += std::string(to_string(v.code)) + " (" + v.message + ")";
    }
    return out;
  }

  std::vector<Violation> violations_;
};

}  // namespace esplace
