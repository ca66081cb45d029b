#pragma once

#include <stdexcept>
#include <string>

namespace mgap {

// Invalid user-supplied configuration (bad gains, unknown keys, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller violated a documented precondition; signals a bug, not bad input.
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Integration produced non-finite state (unstable gains / dt).
struct SimDivergedError : std::runtime_error {
    explicit SimDivergedError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed persisted data.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training or inference produced non-finite values.
struct ModelDivergedError : std::runtime_error {
    explicit ModelDivergedError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mgap
