#pragma once

#include <stdexcept>
#include <string>

namespace crt {

enum class ErrorCategory {
    invalid_parameter,
    data,
    envelope_failure,
    resource_guard,
    io,
    unknown_experiment,
    validation_gate,
};

/// Base of every error raised by the library. The category maps onto the
/// CLI exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

class InvalidParameter : public Error {
public:
    explicit InvalidParameter(const std::string& what)
        : Error(ErrorCategory::invalid_parameter, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

class EnvelopeFailure : public Error {
public:
    explicit EnvelopeFailure(const std::string& what)
        : Error(ErrorCategory::envelope_failure, what) {}
};

class ResourceGuardError : public Error {
public:
    explicit ResourceGuardError(const std::string& what)
        : Error(ErrorCategory::resource_guard, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

class UnknownExperiment : public Error {
public:
    explicit UnknownExperiment(const std::string& what)
        : Error(ErrorCategory::unknown_experiment, what) {}
};

class ValidationGateError : public Error {
public:
    explicit ValidationGateError(const std::string& what)
        : Error(ErrorCategory::validation_gate, what) {}
};

const char* category_name(ErrorCategory category) noexcept;
int exit_code(ErrorCategory category) noexcept;

}  // namespace crt
