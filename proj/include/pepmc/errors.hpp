#pragma once

#include <stdexcept>
#include <string>

namespace pepmc {

/// Process exit codes used by the command-line tool. Documented in README.md.
enum class ExitCode : int {
  Ok = 0,
  Usage = 1,
  ConfigMissing = 2,
  ConfigSyntax = 3,
  ConfigInvalid = 4,
  Io = 5,
  Domain = 6,
};

/// Configuration-file failure. Carries the failure kind and, where known,
/// the offending line number(s).
class ConfigError : public std::runtime_error {
 public:
  enum class Kind { MissingFile, Syntax, Validation };

  ConfigError(Kind kind, std::string message, int line = 0)
      : std::runtime_error(std::move(message)), kind_(kind), line_(line) {}

  Kind kind() const noexcept { return kind_; }
  int line() const noexcept { return line_; }

  ExitCode exit_code() const noexcept {
    switch (kind_) {
      case Kind::MissingFile: return ExitCode::ConfigMissing;
      case Kind::Syntax: return ExitCode::ConfigSyntax;
      case Kind::Validation: return ExitCode::ConfigInvalid;
    }
    return ExitCode::ConfigInvalid;
  }

 private:
  Kind kind_;
  int line_;
};

/// File-system / stream failure outside the config parser.
class IoError : public std::runtime_error {
 public:
  explicit IoError(std::string message) : std::runtime_error(std::move(message)) {}
};

}  // namespace pepmc
