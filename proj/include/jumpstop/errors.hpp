#pragma once

#include <stdexcept>

namespace jumpstop {

/// Base class of all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameter, configuration value, or out-of-domain input.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Exponent classification is ambiguous: |Q(alpha)| (or |Q'(alpha)|) falls
/// inside the tolerance band where neither the root nor the non-root branch
/// can be trusted. Signals an ill-conditioned problem instance.
class ClassificationError : public Error {
public:
    using Error::Error;
};

/// Evaluation was requested below the deepest built segment.
class DepthError : public Error {
public:
    using Error::Error;
};

/// Boundary fit failed: no bracketed root, or a singular elimination.
class FitError : public Error {
public:
    using Error::Error;
};

} // namespace jumpstop
