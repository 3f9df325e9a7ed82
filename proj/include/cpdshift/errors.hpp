#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpd {

enum class ErrorCode {
  InvalidArgument,
  IndexOverflow,
  OrderTooSmall,
  NonFiniteIntegrand,
  AmbiguousAtom,
  NotAMeasure,
  RankDeficiencyUnstable,
  NotCPD,
  CertificateFailed,
  InvalidSpec,
  InvalidFamily,
  HierarchyViolation,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IndexOverflow: return "IndexOverflow";
    case ErrorCode::OrderTooSmall: return "OrderTooSmall";
    case ErrorCode::NonFiniteIntegrand: return "NonFiniteIntegrand";
    case ErrorCode::AmbiguousAtom: return "AmbiguousAtom";
    case ErrorCode::NotAMeasure: return "NotAMeasure";
    case ErrorCode::RankDeficiencyUnstable: return "RankDeficiencyUnstable";
    case ErrorCode::NotCPD: return "NotCPD";
    case ErrorCode::CertificateFailed: return "CertificateFailed";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidFamily: return "InvalidFamily";
    case ErrorCode::HierarchyViolation: return "HierarchyViolation";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cpd
