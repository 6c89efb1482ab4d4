#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace buzzcast {

// Base of every error the library throws. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: invalid specs, CSV schema/row problems, bad config values.
class ValidationError : public Error {
public:
    using Error::Error;
};

class SchemaError : public ValidationError {
public:
    explicit SchemaError(const std::string& column)
        : ValidationError("missing column '" + column + "'"), column_(column) {}
    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

class RowError : public ValidationError {
public:
    RowError(std::size_t line, const std::string& what)
        : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Malformed archive response or fixture record.
class DecodeError : public ValidationError {
public:
    DecodeError(std::size_t record, const std::string& what)
        : ValidationError("record " + std::to_string(record) + ": " + what), record_(record) {}
    std::size_t record() const noexcept { return record_; }

private:
    std::size_t record_;
};

class FetchError : public Error {
public:
    FetchError(int attempts, const std::string& what)
        : Error(what + " (after " + std::to_string(attempts) + " attempts)"), attempts_(attempts) {}
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// Operation invoked on an object that has not been fitted yet.
class StateError : public Error {
public:
    using Error::Error;
};

class FeasibilityError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace buzzcast
