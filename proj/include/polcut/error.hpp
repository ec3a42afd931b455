#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polcut {

enum class Errc {
  UnknownLabel,
  NonPositiveCapacity,
  ReservedEpsilonLabel,
  UnknownNode,
  DuplicateNode,
  SyntaxError,
  UnknownToken,
  NoAcceptingState,
  AlphabetMismatch,
  UnknownPreset,
  UnknownSymbol,
  MultipleTerminals,
  SourceEqualsSink,
  UnboundedFlow,
  ExplosionGuard,
  ParseError,
  ConflictingRelationship,
  InsufficientSupport,
  ArithmeticOverflow,
  IoError,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::NonPositiveCapacity: return "NonPositiveCapacity";
    case Errc::ReservedEpsilonLabel: return "ReservedEpsilonLabel";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::DuplicateNode: return "DuplicateNode";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UnknownToken: return "UnknownToken";
    case Errc::NoAcceptingState: return "NoAcceptingState";
    case Errc::AlphabetMismatch: return "AlphabetMismatch";
    case Errc::UnknownPreset: return "UnknownPreset";
    case Errc::UnknownSymbol: return "UnknownSymbol";
    case Errc::MultipleTerminals: return "MultipleTerminals";
    case Errc::SourceEqualsSink: return "SourceEqualsSink";
    case Errc::UnboundedFlow: return "UnboundedFlow";
    case Errc::ExplosionGuard: return "ExplosionGuard";
    case Errc::ParseError: return "ParseError";
    case Errc::ConflictingRelationship: return "ConflictingRelationship";
    case Errc::InsufficientSupport: return "InsufficientSupport";
    case Errc::ArithmeticOverflow: return "ArithmeticOverflow";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI's structured error record) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Parse failures that point into a line or a character offset.
class PositionedError : public Error {
 public:
  PositionedError(Errc code, std::size_t position, const std::string& message)
      : Error(code, message + " (at " + std::to_string(position) + ")"), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace polcut
