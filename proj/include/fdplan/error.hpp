#pragma once

#include <stdexcept>
#include <string>

namespace fdplan {

// Base for every error raised by the library. Callers that only care about
// "something went wrong" catch this; the CLI maps it to the runtime exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inputs that make an operation undefined (zero capacity, zero energy, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

// A dataset or model is inconsistent (missing EAF model, duplicate plant, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Planning targets cannot be met under the given horizon and lead times.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

// Malformed file content. Carries the 1-based line (0 when not applicable).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Distinct parse failures for 8760-row traces.
class TraceLengthError : public ParseError {
public:
    using ParseError::ParseError;
};

class TraceRangeError : public ParseError {
public:
    using ParseError::ParseError;
};

class TraceValueError : public ParseError {
public:
    using ParseError::ParseError;
};

} // namespace fdplan
