#pragma once

#include <stdexcept>
#include <string>

namespace popsim {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad user-supplied argument (population too small, empty sample, ...).
class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

// Operation not defined for the requested protocol (e.g. silence on log_time).
class UnsupportedProtocolError : public Error {
public:
    using Error::Error;
};

// An incompatible (init kind, protocol) pairing or out-of-domain value.
class DomainError : public Error {
public:
    using Error::Error;
};

// Exact enumeration would exceed the configured budget.
class CapacityError : public Error {
public:
    using Error::Error;
};

// Internal consistency violation: a transition produced an invalid state.
class InternalError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace popsim
