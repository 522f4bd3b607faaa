#pragma once

#include <stdexcept>
#include <string>

namespace glmos {

// Invalid configuration or a config/data mismatch (unknown column, level not
// applicable to a variable kind, ...). CLI exit status 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable or malformed input, or a numerically unusable dataset.
// CLI exit status 1.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace glmos
