#pragma once

#include <stdexcept>
#include <string>

namespace somqe {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters (grid shape, learning rate, series spec, ...).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error("configuration error: " + msg) {}
};

/// Data that does not satisfy an operation's precondition.
class InputError : public Error {
 public:
  explicit InputError(const std::string& msg) : Error("input error: " + msg) {}
};

/// Malformed or unsupported image/manifest file.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg) : Error("format error: " + msg) {}
};

/// File system failures.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error("I/O error: " + msg) {}
};

}  // namespace somqe
