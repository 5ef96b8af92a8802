#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gaussot {

enum class ErrorCode {
    InvalidInput,
    SingularMatrix,
    ShapeError,
    FormatError,
    UnsupportedTensor,
    IoError,
    MissingStyleRegion,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::SingularMatrix: return "SingularMatrix";
        case ErrorCode::ShapeError: return "ShapeError";
        case ErrorCode::FormatError: return "FormatError";
        case ErrorCode::UnsupportedTensor: return "UnsupportedTensor";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::MissingStyleRegion: return "MissingStyleRegion";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto a single machine-parsable stderr line.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace gaussot
