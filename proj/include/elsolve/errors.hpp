#pragma once

#include <stdexcept>
#include <string>

namespace elsolve {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested problem size exceeds a guard (mesh level, dense size, ...).
class SizeError : public Error {
public:
    using Error::Error;
};

/// Degenerate or inverted element.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Array dimensions do not match.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Scalar parameter outside its admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Node index outside [0, n_nodes).
class IndexError : public Error {
public:
    using Error::Error;
};

/// Non-finite input or function value.
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// Power iteration start vector vanishes after masking.
class SeedError : public Error {
public:
    using Error::Error;
};

/// Reduced system could not be factorized (not SPD).
class FactorizationError : public Error {
public:
    using Error::Error;
};

}  // namespace elsolve
