#pragma once

#include <stdexcept>
#include <string>

namespace mpq {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
    using Error::Error;
};

struct DimensionMismatch : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};

// Raised when a propagator violates its norm/trace/positivity budget.
struct ConvergenceFailure : Error {
    ConvergenceFailure(const std::string& what, std::string diag)
        : Error(what), diagnostics(std::move(diag)) {}
    std::string diagnostics;
};

struct TruncationError : Error {
    using Error::Error;
};

struct UnsupportedTarget : Error {
    using Error::Error;
};

struct ValidationError : Error {
    using Error::Error;
};

}  // namespace mpq
