#pragma once

#include <stdexcept>
#include <string>

namespace chaosssl {

// Shape disagreement between operands.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Value outside the mathematical domain of an operation (log of a
// nonpositive number, a pixel outside [0,1], a zero-norm row, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Caller broke a precondition that is not about shapes or numeric domains.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Malformed, truncated or version-mismatched file.
class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Failure inside one pipeline stage; the message is prefixed with the stage.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace chaosssl
