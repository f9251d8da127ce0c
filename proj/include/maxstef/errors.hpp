#pragma once

#include <stdexcept>
#include <string>

namespace maxstef {

// Exit codes used by the CLI: 0 success, 1 validation, 2 numerical, 3 I/O.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace maxstef
