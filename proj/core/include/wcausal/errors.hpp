#pragma once

#include <stdexcept>
#include <string>

namespace wcausal {

// Base class for every failure this library raises on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller passed an argument that no input data could make valid.
struct InvalidArgument : Error {
    using Error::Error;
};

// Too few observations to carry out the requested fit or lift.
struct InsufficientData : Error {
    using Error::Error;
};

// Values outside declared bounds, non-finite input, or a curve that
// fails monotonicity.
struct DomainViolation : Error {
    using Error::Error;
};

// Two curves meet in an operation but live on different level grids.
struct GridMismatch : Error {
    using Error::Error;
};

// Logistic fit diverged: perfectly separated arms or an empty arm.
struct SeparationError : Error {
    using Error::Error;
};

// Design matrix is rank deficient after dropping constant columns.
struct SingularDesign : Error {
    using Error::Error;
};

// A cross-fitting fold ended up without both treatment arms.
struct FoldDegenerate : Error {
    using Error::Error;
};

// Malformed input file: bad CSV shape, unknown JSON field, bad header.
struct SchemaError : Error {
    using Error::Error;
};

// A config file asked for something the tool cannot do.
struct ConfigError : Error {
    using Error::Error;
};

// Numerical routine failed to converge or produced non-finite output.
struct NumericalError : Error {
    using Error::Error;
};

// A command line could not be interpreted: bad flag value or a
// combination of flags that contradict each other.
struct UsageError : Error {
    using Error::Error;
};

// A lookup by identifier matched nothing.
struct NotFound : Error {
    using Error::Error;
};

}  // namespace wcausal
