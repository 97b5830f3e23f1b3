#pragma once

#include <stdexcept>
#include <string>

namespace polykin {

/// Failure categories. The numeric values double as the CLI exit codes.
enum class ErrorKind : int {
  parameter = 1,
  vacuum = 2,
  parse = 3,
  theorem_violation = 4,
  numerical = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

inline Error parameter_error(const std::string& what) {
  return Error(ErrorKind::parameter, what);
}
inline Error vacuum_error(const std::string& what) {
  return Error(ErrorKind::vacuum, what);
}
inline Error parse_error(const std::string& what) {
  return Error(ErrorKind::parse, what);
}
inline Error numerical_error(const std::string& what) {
  return Error(ErrorKind::numerical, what);
}

}  // namespace polykin
