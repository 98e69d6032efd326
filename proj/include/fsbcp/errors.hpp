#pragma once

#include <stdexcept>
#include <string>

namespace fsbcp {

/// Failure categories; see exit_code() for the CLI mapping.
enum class ErrorKind : int {
  invalid_argument = 1,
  input_error = 2,
  fit_failure = 3,
  io_error = 4,
  insufficient_data = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::invalid_argument, what) {}
};

class InsufficientData : public Error {
 public:
  explicit InsufficientData(const std::string& what)
      : Error(ErrorKind::insufficient_data, what) {}
};

class FitFailure : public Error {
 public:
  explicit FitFailure(const std::string& what)
      : Error(ErrorKind::fit_failure, what) {}
};

/// Malformed user input; carries the 1-based line and column when known.
class InputError : public Error {
 public:
  InputError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(ErrorKind::input_error, format(what, line, column)),
        line_(line),
        column_(column) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what;
    std::string out = "line " + std::to_string(line);
    if (column != 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, const std::string& path)
      : Error(ErrorKind::io_error, path + ": " + what), path_(path) {}

  [[nodiscard]] const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Exit code used by the command-line tool for a given failure kind.
[[nodiscard]] inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::input_error:
    case ErrorKind::invalid_argument:
    case ErrorKind::insufficient_data:
      return 2;
    case ErrorKind::fit_failure:
      return 3;
    case ErrorKind::io_error:
      return 4;
  }
  return 1;
}

}  // namespace fsbcp
