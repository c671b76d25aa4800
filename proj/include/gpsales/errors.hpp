#pragma once

#include <stdexcept>
#include <string>

namespace gpsales {

// File, format, and schema problems. The CLI maps these to exit code 2;
// every other std::exception maps to exit code 1.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gpsales
