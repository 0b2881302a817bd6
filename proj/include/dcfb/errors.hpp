#pragma once

#include <stdexcept>
#include <string>

namespace dcfb {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rejected input: a precondition on arguments was violated.
class InputError : public Error {
public:
    using Error::Error;
};

// Malformed file content (bad magic, version, truncation, trailing bytes).
class FormatError : public Error {
public:
    using Error::Error;
};

// Optimizer fed non-finite values.
class OptimError : public Error {
public:
    using Error::Error;
};

// Model shape does not match its declared architecture.
class ArchitectureError : public Error {
public:
    using Error::Error;
};

// A pixel was covered by no patch during aggregation.
class CoverageError : public Error {
public:
    using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    using Error::Error;
};

} // namespace dcfb
