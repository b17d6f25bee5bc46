#pragma once

#include <stdexcept>
#include <string>

namespace ici {

// Base class for all toolkit errors. CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad arguments or preconditions (zero dims, odd folded torus, radix too high, ...).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

// Objects that do not belong together (table built for a different topology, ...).
class IntegrityError : public Error {
public:
    explicit IntegrityError(const std::string& what) : Error(what) {}
};

// No deadlock-free route set exists under the current restrictions.
class RoutingError : public Error {
public:
    explicit RoutingError(const std::string& what) : Error(what) {}
};

// Malformed input file; message carries file/line context.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

} // namespace ici
