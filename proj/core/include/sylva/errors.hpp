#pragma once

#include <stdexcept>
#include <string>

namespace sylva {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value or combination of values violates a documented contract.
class DomainError : public Error {
public:
    using Error::Error;
};

/// An identifier (node, state, outcome) is not present where required.
class LookupError : public Error {
public:
    using Error::Error;
};

/// An input file is malformed or structurally invalid.
class ParseError : public Error {
public:
    using Error::Error;
};

/// An internal invariant failed; indicates a bug, not bad input.
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace sylva
