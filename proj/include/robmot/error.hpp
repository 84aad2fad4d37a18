#pragma once

#include <stdexcept>
#include <string>

namespace robmot {

enum class ErrorKind {
    InvalidInput,
    NonConvexQuotes,
    MeanMismatch,
    SizeLimit,
    InfeasiblePolytope,
    IterationLimit,
    BracketInvalid,
    LatticeMismatch,
    DivergenceInfinite,
    HarnessLimit,
    AssumptionViolated,
    CrossCheckFailed,
    ParseError,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so that
/// front ends can map it onto an exit code without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace robmot
