#include "robmot/error.hpp"

namespace robmot {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidInput: return "InvalidInput";
        case ErrorKind::NonConvexQuotes: return "NonConvexQuotes";
        case ErrorKind::MeanMismatch: return "MeanMismatch";
        case ErrorKind::SizeLimit: return "SizeLimit";
        case ErrorKind::InfeasiblePolytope: return "InfeasiblePolytope";
        case ErrorKind::IterationLimit: return "IterationLimit";
        case ErrorKind::BracketInvalid: return "BracketInvalid";
        case ErrorKind::LatticeMismatch: return "LatticeMismatch";
        case ErrorKind::DivergenceInfinite: return "DivergenceInfinite";
        case ErrorKind::HarnessLimit: return "HarnessLimit";
        case ErrorKind::AssumptionViolated: return "AssumptionViolated";
        case ErrorKind::CrossCheckFailed: return "CrossCheckFailed";
        case ErrorKind::ParseError: return "ParseError";
    }
    return "Unknown";
}

}  // namespace robmot
