#ifndef AXCAT_ERROR_HPP_
#define AXCAT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace axcat {

enum class ErrorKind {
  Syntax,
  DuplicateLabel,
  UndefinedJumpTarget,
  OverlappingLayout,
  UnknownRegister,
  UnknownLabel,
  UndefinedName,
  DuplicateDefinition,
  NonMonotoneRecursion,
  DomainTooSmall,
  ConfigMismatch,
  MissingExpectation,
  InvalidArgument,
  Io,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Syntax: return "syntax-error";
    case ErrorKind::DuplicateLabel: return "duplicate-label";
    case ErrorKind::UndefinedJumpTarget: return "undefined-jump-target";
    case ErrorKind::OverlappingLayout: return "overlapping-layout";
    case ErrorKind::UnknownRegister: return "unknown-register";
    case ErrorKind::UnknownLabel: return "unknown-label";
    case ErrorKind::UndefinedName: return "undefined-name";
    case ErrorKind::DuplicateDefinition: return "duplicate-definition";
    case ErrorKind::NonMonotoneRecursion: return "non-monotone-recursion";
    case ErrorKind::DomainTooSmall: return "domain-too-small";
    case ErrorKind::ConfigMismatch: return "config-mismatch";
    case ErrorKind::MissingExpectation: return "missing-expectation";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Io: return "io-error";
  }
  return "error";
}

/// Every failure raised by the library. `line`/`column` are 1-based source
/// positions, or 0 when the error is not tied to a location.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg, int line = 0, int column = 0)
      : std::runtime_error(format(kind, msg, line, column)),
        kind_(kind),
        line_(line),
        column_(column) {}

  ErrorKind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(ErrorKind kind, const std::string& msg, int line,
                            int column) {
    std::string out = to_string(kind);
    if (line > 0) {
      out += " at " + std::to_string(line);
      if (column > 0) out += ":" + std::to_string(column);
    }
    return out + ": " + msg;
  }

  ErrorKind kind_;
  int line_;
  int column_;
};

}  // namespace axcat

#endif  // AXCAT_ERROR_HPP_
