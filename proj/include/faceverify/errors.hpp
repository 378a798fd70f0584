#pragma once

#include <stdexcept>
#include <string>

namespace faceverify {

// Base class for everything this library throws.
class error : public std::runtime_error {
public:
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid input: malformed files, bad arguments, violated preconditions.
// The CLI maps these to exit code 2.
class input_error : public error {
public:
  explicit input_error(const std::string& msg) : error(msg) {}
};

// Numerical failure at runtime: non-convergence, singular systems.
// The CLI maps these to exit code 3.
class compute_error : public error {
public:
  explicit compute_error(const std::string& msg) : error(msg) {}
};

}  // namespace faceverify
