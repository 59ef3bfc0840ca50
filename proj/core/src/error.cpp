#include "bispectral/error.hpp"

namespace bispectral {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DivisionByZero: return "DivisionByZero";
        case ErrorCode::MixedBackend: return "MixedBackend";
        case ErrorCode::ApproxBackendUnsupported: return "ApproxBackendUnsupported";
        case ErrorCode::InsufficientPrecision: return "InsufficientPrecision";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::DegenerateBasis: return "DegenerateBasis";
        case ErrorCode::NotQuasiPolynomial: return "NotQuasiPolynomial";
        case ErrorCode::NotSpecial: return "NotSpecial";
        case ErrorCode::MissingSingularPoint: return "MissingSingularPoint";
        case ErrorCode::NotRegularizable: return "NotRegularizable";
        case ErrorCode::NonAdmissibleTuple: return "NonAdmissibleTuple";
        case ErrorCode::NotInPhiForm: return "NotInPhiForm";
        case ErrorCode::EssentialSingularity: return "EssentialSingularity";
        case ErrorCode::NonAdmissiblePoint: return "NonAdmissiblePoint";
        case ErrorCode::NonAdmissibleSpace: return "NonAdmissibleSpace";
        case ErrorCode::PossiblyNonGeneric: return "PossiblyNonGeneric";
        case ErrorCode::MaxStartsExceeded: return "MaxStartsExceeded";
        case ErrorCode::KernelSolveFailed: return "KernelSolveFailed";
        case ErrorCode::CorrespondenceBroken: return "CorrespondenceBroken";
        case ErrorCode::WeightMismatch: return "WeightMismatch";
        case ErrorCode::CoincidingParameters: return "CoincidingParameters";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::DegreeTooHigh: return "DegreeTooHigh";
        case ErrorCode::DualityViolation: return "DualityViolation";
        case ErrorCode::NonPolynomialCoefficients: return "NonPolynomialCoefficients";
        case ErrorCode::PoleHit: return "PoleHit";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace bispectral
