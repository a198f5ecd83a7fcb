#pragma once

#include <stdexcept>
#include <string>

namespace ipmlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent experiment configuration. Carries the offending
/// key path (e.g. "kernel.sigma").
class ConfigError : public Error {
 public:
  ConfigError(std::string key_path, const std::string& message)
      : Error(key_path.empty() ? message : key_path + ": " + message),
        key_path_(std::move(key_path)) {}

  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

/// Non-finite values, individuals leaving the domain box, corrupted grids.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ipmlab
