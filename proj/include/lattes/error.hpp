#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lattes {

enum class ErrorCode {
    SyntaxError,
    MixedRadicals,
    LowerHalfPlane,
    NotACovering,
    DegreeTooLow,
    IncompatibleField,
    FieldClash,
    SlopeNotInvariant,
    DegenerateSegment,
    UncertainAtTolerance,
    BudgetExceeded,
    NoCollisionWithinBudget,
    NotLattesCompatible,
    WrongLatticeForGroup,
    OddPeriodPairing,
    NearPole,
    FitIllConditioned,
    ResidualExceedsTol,
    UsageError,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::MixedRadicals: return "MixedRadicals";
        case ErrorCode::LowerHalfPlane: return "LowerHalfPlane";
        case ErrorCode::NotACovering: return "NotACovering";
        case ErrorCode::DegreeTooLow: return "DegreeTooLow";
        case ErrorCode::IncompatibleField: return "IncompatibleField";
        case ErrorCode::FieldClash: return "FieldClash";
        case ErrorCode::SlopeNotInvariant: return "SlopeNotInvariant";
        case ErrorCode::DegenerateSegment: return "DegenerateSegment";
        case ErrorCode::UncertainAtTolerance: return "UncertainAtTolerance";
        case ErrorCode::BudgetExceeded: return "BudgetExceeded";
        case ErrorCode::NoCollisionWithinBudget: return "NoCollisionWithinBudget";
        case ErrorCode::NotLattesCompatible: return "NotLattesCompatible";
        case ErrorCode::WrongLatticeForGroup: return "WrongLatticeForGroup";
        case ErrorCode::OddPeriodPairing: return "OddPeriodPairing";
        case ErrorCode::NearPole: return "NearPole";
        case ErrorCode::FitIllConditioned: return "FitIllConditioned";
        case ErrorCode::ResidualExceedsTol: return "ResidualExceedsTol";
        case ErrorCode::UsageError: return "UsageError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every domain failure in the library is reported through this exception.
/// The code is machine readable and is what the CLI prints.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

    ErrorCode code() const noexcept { return code_; }
    /// The message without the code prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

}  // namespace lattes
