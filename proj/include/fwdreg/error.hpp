#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace fwdreg {

enum class ErrorCode {
    invalid_argument,
    zero_variance_column,
    rank_deficient_support,
    collinear_candidate,
    not_standardized,
    budget_exceeded,
    nonpositive_eigenvalue,
    missing_ground_truth,
    malformed_input,
};

inline const char* to_string(ErrorCode code)
{
    switch (code) {
        case ErrorCode::invalid_argument: return "InvalidArgument";
        case ErrorCode::zero_variance_column: return "ZeroVarianceColumn";
        case ErrorCode::rank_deficient_support: return "RankDeficientSupport";
        case ErrorCode::collinear_candidate: return "CollinearCandidate";
        case ErrorCode::not_standardized: return "NotStandardized";
        case ErrorCode::budget_exceeded: return "BudgetExceeded";
        case ErrorCode::nonpositive_eigenvalue: return "NonpositiveEigenvalue";
        case ErrorCode::missing_ground_truth: return "MissingGroundTruth";
        case ErrorCode::malformed_input: return "MalformedInput";
    }
    return "Unknown";
}

/**
 * Single exception type for the library. `code()` identifies the failure;
 * `column()` carries the offending covariate index for column-level errors
 * (ZeroVarianceColumn, CollinearCandidate).
 */
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& what,
          std::optional<std::size_t> column = std::nullopt)
        : std::runtime_error(std::string(to_string(code)) + ": " + what),
          code_(code), column_(column)
    {}

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> column() const noexcept { return column_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> column_;
};

} // namespace fwdreg
