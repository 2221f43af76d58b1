#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace piv {

// Input rejected by a validation rule; field() names the offending input.
class validation_error : public std::invalid_argument {
public:
    validation_error(std::string field, const std::string& message)
        : std::invalid_argument(message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Argument outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Requested quantity is attained only in a limit (probability exactly 0 or 1).
class saturation_error : public domain_error {
public:
    using domain_error::domain_error;
};

}  // namespace piv
