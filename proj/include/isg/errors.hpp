#pragma once

#include <stdexcept>
#include <string>

namespace isg {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Problem document does not conform to the schema.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Document parsed but violates a hard assumption (cost floor, knot order, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain (impulse not in Z, state outside S).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Wrong number of items (empty batch, zero grid counts).
class ArityError : public Error {
public:
    using Error::Error;
};

/// State or field dimension does not match the problem.
class DimensionError : public Error {
public:
    using Error::Error;
};

class StencilError : public Error {
public:
    using Error::Error;
};

/// The discretization is not monotone at some node.
class SchemeError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class LatticeError : public Error {
public:
    using Error::Error;
};

/// A policy was requested from a field whose solve did not converge.
class StaleFieldError : public Error {
public:
    using Error::Error;
};

/// Invalid simulation step.
class StepError : public Error {
public:
    using Error::Error;
};

}  // namespace isg
