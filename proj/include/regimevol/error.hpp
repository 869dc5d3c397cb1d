#pragma once

#include <stdexcept>
#include <string>

namespace regimevol {

/// Machine-checkable failure categories used across the toolkit.
enum class ErrorCode {
    ParseError,
    DuplicateDate,
    EmptySeries,
    NonPositivePrice,
    TooShort,
    NoOverlap,
    FrequencyMismatch,
    SingularRegression,
    InvalidTrim,
    ConstantColumn,
    InvalidShape,
    InsufficientHistory,
    PositivityViolated,
    NonStationaryParams,
    InsufficientData,
    NoConvergence,
    NotFitted,
    DegenerateDensity,
    InvalidTau,
    RankDeficient,
    TooSmallSample,
    SingularH,
    NoIntercept,
    TooLarge,
    InvalidParams,
    ConfigError,
    IoError,
};

constexpr const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::DuplicateDate: return "DuplicateDate";
        case ErrorCode::EmptySeries: return "EmptySeries";
        case ErrorCode::NonPositivePrice: return "NonPositivePrice";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::NoOverlap: return "NoOverlap";
        case ErrorCode::FrequencyMismatch: return "FrequencyMismatch";
        case ErrorCode::SingularRegression: return "SingularRegression";
        case ErrorCode::InvalidTrim: return "InvalidTrim";
        case ErrorCode::ConstantColumn: return "ConstantColumn";
        case ErrorCode::InvalidShape: return "InvalidShape";
        case ErrorCode::InsufficientHistory: return "InsufficientHistory";
        case ErrorCode::PositivityViolated: return "PositivityViolated";
        case ErrorCode::NonStationaryParams: return "NonStationaryParams";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::NotFitted: return "NotFitted";
        case ErrorCode::DegenerateDensity: return "DegenerateDensity";
        case ErrorCode::InvalidTau: return "InvalidTau";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::TooSmallSample: return "TooSmallSample";
        case ErrorCode::SingularH: return "SingularH";
        case ErrorCode::NoIntercept: return "NoIntercept";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

/// Exception type carrying an ErrorCode so callers can branch on the
/// failure category without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace regimevol
