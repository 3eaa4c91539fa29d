#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace turnscan {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates an operation's preconditions (empty, too small, degenerate).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Malformed file content. `location()` is a 1-based line number for text
/// sections and a byte offset for binary sections.
class ParseError : public Error {
 public:
  enum class Unit { line, byte };

  ParseError(const std::string& what, std::size_t location, Unit unit)
      : Error(what + (unit == Unit::line ? " (line " : " (byte offset ") +
              std::to_string(location) + ")"),
        location_(location),
        unit_(unit) {}

  std::size_t location() const { return location_; }
  Unit unit() const { return unit_; }

 private:
  std::size_t location_;
  Unit unit_;
};

/// Bad configuration value; carries the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error(key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// ICP ran out of correspondences.
class InsufficientOverlap : public Error {
 public:
  using Error::Error;
};

}  // namespace turnscan
