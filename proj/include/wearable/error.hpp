#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wearable {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input record. Carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A syntactically valid record whose sensor kind is not recognised.
class RejectedRecordError : public ParseError {
public:
    using ParseError::ParseError;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class EmptyDayError : public Error {
public:
    using Error::Error;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

/// A quantity (distance, score, correlation) that has no defined value for the inputs.
class UndefinedValueError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class EmptyCohortError : public Error {
public:
    using Error::Error;
};

/// Input series that cannot be prepared for an algorithm (e.g. constant under z-normalization).
class PreprocessingError : public Error {
public:
    PreprocessingError(std::size_t index, const std::string& message)
        : Error("series " + std::to_string(index) + ": " + message), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace wearable
