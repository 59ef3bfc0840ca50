#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bispectral {

enum class ErrorCode {
    DivisionByZero,
    MixedBackend,
    ApproxBackendUnsupported,
    InsufficientPrecision,
    NoConvergence,
    DegenerateBasis,
    NotQuasiPolynomial,
    NotSpecial,
    MissingSingularPoint,
    NotRegularizable,
    NonAdmissibleTuple,
    NotInPhiForm,
    EssentialSingularity,
    NonAdmissiblePoint,
    NonAdmissibleSpace,
    PossiblyNonGeneric,
    MaxStartsExceeded,
    KernelSolveFailed,
    CorrespondenceBroken,
    WeightMismatch,
    CoincidingParameters,
    OutOfRange,
    DegreeTooHigh,
    DualityViolation,
    NonPolynomialCoefficients,
    PoleHit,
    InvalidArgument,
    ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it to an exit status and a stable message prefix.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace bispectral
