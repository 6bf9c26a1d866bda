#pragma once

#include <stdexcept>
#include <string>

namespace cavity {

/// Bad input: a configuration value or a precondition the caller controls.
/// `key` names the offending field when there is one (dotted path for configs).
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string key, const std::string& what)
        : std::invalid_argument(what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// A computation that cannot produce a trustworthy number.
class NumericalError : public std::runtime_error {
public:
    enum class Kind { EtaVanishes, Underflow, Leakage, PhaseStep, Domain, Convergence, Other };

    NumericalError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

const char* to_string(NumericalError::Kind kind);

}  // namespace cavity
