#pragma once

#include <stdexcept>
#include <string>

namespace pathfair {

// Raised for invalid user input: malformed configs, inconsistent graphs,
// pathway sets that fail validation, bad CLI arguments. The CLI maps this
// to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised for failures during execution: I/O errors, non-finite objectives,
// numerical breakdowns. The CLI maps this to exit code 3.
struct RuntimeFailure : std::runtime_error {
  explicit RuntimeFailure(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pathfair
