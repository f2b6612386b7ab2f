#pragma once

#include <stdexcept>
#include <string>

namespace revelio {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    UnsupportedRate,
    SingularHomography,
    EpochTooShort,
    LengthMismatch,
    InvalidStore,
    InvalidConfig,
    Io,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::UnsupportedRate: return "UnsupportedRate";
        case ErrorCode::SingularHomography: return "SingularHomography";
        case ErrorCode::EpochTooShort: return "EpochTooShort";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::InvalidStore: return "InvalidStore";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable error category.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace revelio
