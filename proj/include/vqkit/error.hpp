#pragma once

#include <stdexcept>
#include <string>

namespace vqkit {

enum class ErrorCode {
    InvalidArgument,
    InvalidTable,
    CalibrationDegenerate,
    CalibrationNoConverge,
    RescaleDegenerate,
    MissingCalibration,
    InvalidSummary,
    InvalidDistribution,
    InfiniteDivergence,
    InfiniteLoss,
    InvalidSpec,
    CodecUnavailable,
    EncodeFailed,
    MetricInfeasible,
    CorrelationDegenerate,
    PairBudgetExhausted,
    JudgeUnavailable,
    IoError,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument:        return "invalid_argument";
        case ErrorCode::InvalidTable:           return "invalid_table";
        case ErrorCode::CalibrationDegenerate:  return "calibration_degenerate";
        case ErrorCode::CalibrationNoConverge:  return "calibration_no_converge";
        case ErrorCode::RescaleDegenerate:      return "rescale_degenerate";
        case ErrorCode::MissingCalibration:     return "missing_calibration";
        case ErrorCode::InvalidSummary:         return "invalid_summary";
        case ErrorCode::InvalidDistribution:    return "invalid_distribution";
        case ErrorCode::InfiniteDivergence:     return "infinite_divergence";
        case ErrorCode::InfiniteLoss:           return "infinite_loss";
        case ErrorCode::InvalidSpec:            return "invalid_spec";
        case ErrorCode::CodecUnavailable:       return "codec_unavailable";
        case ErrorCode::EncodeFailed:           return "encode_failed";
        case ErrorCode::MetricInfeasible:       return "metric_infeasible";
        case ErrorCode::CorrelationDegenerate:  return "correlation_degenerate";
        case ErrorCode::PairBudgetExhausted:    return "pair_budget_exhausted";
        case ErrorCode::JudgeUnavailable:       return "judge_unavailable";
        case ErrorCode::IoError:                return "io_error";
    }
    return "unknown";
}

/// Domain error carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace vqkit
