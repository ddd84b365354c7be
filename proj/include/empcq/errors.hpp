#pragma once

#include <stdexcept>

namespace empcq {

// Base class for all library failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Document is not syntactically usable: bad JSON, missing fields, wrong types.
class ParseError : public Error {
public:
    using Error::Error;
};

// Filesystem-level failure (unreadable input, unwritable destination).
class IoError : public Error {
public:
    using Error::Error;
};

// A well-formed document violates a partition invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Value outside the representable range of a fixed-point format.
class OverflowError : public Error {
public:
    using Error::Error;
};

// Invalid argument or state for an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace empcq
