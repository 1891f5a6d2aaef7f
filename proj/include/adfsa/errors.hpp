#pragma once

#include <stdexcept>
#include <string>

namespace adfsa {

/// Input data violates a documented precondition (bad CSV, too few samples
/// per class, dimension mismatch). Maps to CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed experiment configuration or CLI usage. Maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace adfsa
