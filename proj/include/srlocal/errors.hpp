#pragma once

#include <stdexcept>
#include <string>

namespace srlocal {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or unsupported file contents (PGM headers, model files, CSV).
struct FormatError : Error {
    using Error::Error;
};

// Input lacks the structure an algorithm needs (constant image, empty support).
struct DegenerateInputError : Error {
    using Error::Error;
};

// Iterative solver left its admissible region or failed to converge.
struct NonConvergenceError : Error {
    NonConvergenceError(const std::string& msg, double last_tx, double last_ty)
        : Error(msg), tx(last_tx), ty(last_ty) {}
    double tx;
    double ty;
};

// A local model could not be built; callers apply their fallback policy.
struct InvalidModelError : Error {
    using Error::Error;
};

} // namespace srlocal
