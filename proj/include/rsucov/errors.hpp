#ifndef RSUCOV_ERRORS_HPP
#define RSUCOV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rsucov {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid numeric input (non-positive distance, weight outside [0,1], ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Elevation query outside the terrain grid hull.
class OutOfTerrainBounds : public Error {
public:
    explicit OutOfTerrainBounds(const std::string& msg) : Error(msg) {}
};

// The dominant-path candidate graph is disconnected.
class NoPathFound : public Error {
public:
    explicit NoPathFound(const std::string& msg) : Error(msg) {}
};

// An operation that needs at least one sample received none.
class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& msg) : Error(msg) {}
};

// Malformed input file; carries the offending line when known.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line = -1)
        : Error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

} // namespace rsucov

#endif
