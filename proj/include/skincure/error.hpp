#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skincure {

enum class ErrorCode {
  InvalidArgument,
  UnknownSpfLevel,
  SourceUnavailable,
  NoDataForLocation,
  DecodeFailed,
  ImageTooSmall,
  DimensionMismatch,
  NoLesionFound,
  LesionTouchesBorder,
  DegenerateLesion,
  InsufficientData,
  LayoutMismatch,
  IncompatibleVersion,
  CorruptModel,
  EmptyInput,
  FileNotFound,
  BadHeader,
  BadLabel,
  DuplicateId,
  BadFractions,
  IoError,
  NotFound,
};

/// Stable identifier used in CLI messages and API error bodies.
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace skincure
