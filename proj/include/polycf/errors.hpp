#pragma once

#include <stdexcept>
#include <string>

namespace polycf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input files (bad tokens, empty train set, ...).
class ParseError : public Error {
public:
    using Error::Error;
};

// Vector/matrix shape disagreements between operators and signals.
class DimensionError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Iterative solver ran out of iterations; message carries residual norms.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Dense diagnostics invoked beyond their n <= 100 desk scale.
class ScaleGuardError : public Error {
public:
    using Error::Error;
};

// Non-finite loss during optimization; message carries a theta dump.
class TrainingError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace polycf
