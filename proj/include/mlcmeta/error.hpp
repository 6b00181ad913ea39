#pragma once

#include <stdexcept>
#include <string>

namespace mlcmeta {

// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file (bad syntax). Carries a 1-based line number when known.
class parse_error : public error {
public:
    explicit parse_error(const std::string& msg, long line = 0)
        : error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_ = 0;
};

// Structurally valid input that violates a schema rule (e.g. non-binary label).
class schema_error : public error {
public:
    using error::error;
};

// Caller broke an operation precondition.
class contract_error : public error {
public:
    using error::error;
};

// A requested measure has no defined value for the given inputs.
class undefined_measure_error : public error {
public:
    using error::error;
};

} // namespace mlcmeta
