#include "skincure/error.hpp"

namespace skincure {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownSpfLevel: return "UnknownSpfLevel";
    case ErrorCode::SourceUnavailable: return "SourceUnavailable";
    case ErrorCode::NoDataForLocation: return "NoDataForLocation";
    case ErrorCode::DecodeFailed: return "DecodeFailed";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoLesionFound: return "NoLesionFound";
    case ErrorCode::LesionTouchesBorder: return "LesionTouchesBorder";
    case ErrorCode::DegenerateLesion: return "DegenerateLesion";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::IncompatibleVersion: return "IncompatibleVersion";
    case ErrorCode::CorruptModel: return "CorruptModel";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::BadFractions: return "BadFractions";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NotFound: return "NotFound";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace skincure
