#pragma once

#include <stdexcept>
#include <string>

namespace cartan {

/// Caller violated an operation's precondition (wrong degree, chart mismatch, ...).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numeric evaluation hit a pole, an invalid function argument or a non-finite value.
class SingularityError : public std::runtime_error {
public:
    SingularityError(const std::string& what, std::string subexpression)
        : std::runtime_error(what + ": " + subexpression), subexpression_(std::move(subexpression)) {}

    const std::string& subexpression() const noexcept { return subexpression_; }

private:
    std::string subexpression_;
};

class UnboundParameterError : public std::runtime_error {
public:
    explicit UnboundParameterError(const std::string& name)
        : std::runtime_error("unbound parameter '" + name + "'"), name_(name) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// Every sample of a probabilistic zero test was singular.
class InconclusiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An identity that must hold by construction failed; signals a bug or a tolerance fault.
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AdvectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, int line, int column)
        : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          message_(message), line_(line), column_(column) {}

    const std::string& message() const noexcept { return message_; }
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    std::string message_;
    int line_;
    int column_;
};

}  // namespace cartan
