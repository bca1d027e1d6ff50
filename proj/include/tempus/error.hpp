#pragma once

#include <stdexcept>
#include <string>

namespace tempus {

/// Root of every error the library throws. `category()` is a stable short
/// tag that the command-line tool maps to exit codes.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* category() const noexcept { return "error"; }
};

/// A caller broke a documented precondition (empty input, bad window size).
class precondition_error : public error {
public:
    using error::error;
    const char* category() const noexcept override { return "precondition"; }
};

/// Unknown column, wrong cell kind, mixed granularities.
class schema_error : public error {
public:
    using error::error;
    const char* category() const noexcept override { return "schema"; }
};

/// Operation not defined for this input (gap verbs on irregular data,
/// flooring an ordinal index to a calendar unit).
class unsupported_error : public error {
public:
    using error::error;
    const char* category() const noexcept override { return "unsupported"; }
};

/// A result would break the temporal-table invariants (duplicate key/index
/// pairs, index removed by a selection).
class validity_error : public error {
public:
    using error::error;
    const char* category() const noexcept override { return "validity"; }
};

/// Order-sensitive operation refused because the series has implicit gaps.
class gap_error : public error {
public:
    using error::error;
    const char* category() const noexcept override { return "gap"; }
};

/// A typed rolling variant got a window result of the wrong kind.
class typed_result_error : public error {
public:
    typed_result_error(const std::string& what, std::size_t position)
        : error(what), position_(position) {}
    const char* category() const noexcept override { return "typed-result"; }
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Text that should be a time value (or a number) could not be parsed.
class parse_error : public error {
public:
    using error::error;
    const char* category() const noexcept override { return "parse"; }
};

class registration_error : public error {
public:
    using error::error;
    const char* category() const noexcept override { return "registration"; }
};

class io_error : public error {
public:
    using error::error;
    const char* category() const noexcept override { return "io"; }
};

} // namespace tempus
