#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cohort {

/// Invalid task configuration. Carries a 1-based source position when the
/// error can be tied to a location in the document (0 means unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::size_t line = 0, std::size_t column = 0,
              const std::string& source = {});

  const std::string& message() const noexcept { return message_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& source() const noexcept { return source_; }  // file path, when known

 private:
  std::string message_;
  std::size_t line_;
  std::size_t column_;
  std::string source_;
};

/// Unreadable, malformed or incompatible input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cohort
