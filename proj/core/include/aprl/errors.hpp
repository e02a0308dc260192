#pragma once

#include <stdexcept>
#include <string>

namespace aprl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// invalid arguments / non-finite state fed to an operation
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// parse failure with a source location (config files, objective scripts)
class ParseError : public Error {
 public:
  ParseError(std::string file, int line, int column, const std::string& msg)
      : Error(file + ":" + std::to_string(line) + ":" + std::to_string(column) +
              ": " + msg),
        file_(std::move(file)),
        line_(line),
        column_(column),
        message_(msg) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::string file_;
  int line_ = 0;
  int column_ = 0;
  std::string message_;
};

}  // namespace aprl
