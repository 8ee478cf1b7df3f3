#pragma once

#include <stdexcept>
#include <string>

namespace melostyle {

/// Base of every error the library throws. `exit_code()` follows the CLI
/// convention: 1 usage, 2 data/validation, 3 numeric.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 2; }
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class FormatError : public Error { using Error::Error; };
class ValidationError : public Error { using Error::Error; };
class AlignmentError : public Error { using Error::Error; };
class UnsupportedFormatError : public Error { using Error::Error; };
class PreconditionError : public Error { using Error::Error; };
class MissingDataError : public Error { using Error::Error; };
class AnomalyError : public Error { using Error::Error; };

/// Feature cannot be evaluated on this input (e.g. an all-unvoiced clip).
class UndefinedFeatureError : public Error { using Error::Error; };

class ArgumentError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 1; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 1; }
};

class NumericError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

class UndefinedCorrelationError : public NumericError { using NumericError::NumericError; };

}  // namespace melostyle
