#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seqband {

enum class ErrorCode {
    InvalidParams,
    InvalidConfig,
    InvalidBaseline,
    InvalidSample,
    InvalidWeight,
    EmptyRequest,
    EmptyVector,
    DomainError,
    NearDegenerate,
    DegenerateSample,
    NonIdentifiable,
    CalibrationMismatch,
    NonMonotoneRow,
    NonPositiveEntry,
    RaggedRow,
    EmptyFile,
    IoError,
    NumericalError,
    NotConverged,
};

std::string_view to_string(ErrorCode code);

// Numerical failures map to CLI exit status 3, everything else to 2.
constexpr bool is_numerical(ErrorCode code)
{
    return code == ErrorCode::NumericalError || code == ErrorCode::NotConverged;
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
    {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message)
{
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message)
{
    if (!condition) {
        fail(code, message);
    }
}

}  // namespace seqband
