#pragma once

#include <stdexcept>
#include <string>

namespace loschmidt {

/// Category of a failure; the CLI maps each one to its own exit status.
enum class ErrorKind {
  InvalidArgument,
  ConfigParse,
  Validation,
  OracleGuard,
  Io,
  Numerical,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, const std::string& what,
                    ErrorKind kind = ErrorKind::InvalidArgument) {
  if (!condition) fail(kind, what);
}

}  // namespace loschmidt
