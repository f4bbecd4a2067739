#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rhb {

// Broad failure classes. The CLI maps these onto exit codes.
enum class ErrorKind {
    Domain,       // precondition violated by an argument
    Parse,        // malformed input data
    Validation,   // well-formed data that fails a consistency rule
    Io,           // file or stream failure
    Numerical,    // a numerical routine failed to converge or broke down
    Arbitrage,    // inputs admit arbitrage (no feasible market model)
    Unbounded,    // payoff cannot be dominated by the hedging instruments
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what), line_(line) {}
    explicit ParseError(const std::string& what) : Error(ErrorKind::Parse, what), line_(0) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class ArbitrageError : public Error {
public:
    explicit ArbitrageError(const std::string& what) : Error(ErrorKind::Arbitrage, what) {}
};

class UnboundedError : public Error {
public:
    explicit UnboundedError(const std::string& what) : Error(ErrorKind::Unbounded, what) {}
};

}  // namespace rhb
