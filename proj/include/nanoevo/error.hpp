#pragma once

#include <stdexcept>
#include <string>

namespace nanoevo {

/// Invalid configuration value. `key()` is the dotted config path, e.g. "world.width".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key + ": " + message), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Argument outside the mathematical domain of a conversion (non-positive volume etc).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Operation called in a state its contract forbids.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Integrator produced a non-finite state.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace nanoevo
