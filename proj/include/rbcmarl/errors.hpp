#pragma once

#include <stdexcept>
#include <string>

namespace rbcmarl {

// Invalid configuration, invalid action values, malformed input files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failures during simulation or training (non-finite losses, I/O).
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rbcmarl
