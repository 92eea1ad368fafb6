#pragma once

#include <stdexcept>
#include <string>

namespace gridnet {

// Base for all library errors.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration (CLI exit code 2).
class config_error : public error {
 public:
  using error::error;
};

// Malformed or inconsistent input data (CLI exit code 3).
class data_error : public error {
 public:
  using error::error;
};

// Estimation found nothing usable, e.g. no significant pairs or no seeds
// (CLI exit code 4).
class no_signal_error : public error {
 public:
  using error::error;
};

}  // namespace gridnet
