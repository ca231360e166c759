#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bnci {

enum class ErrorKind {
  argument,    // caller violated a precondition
  format,      // malformed tabular input
  parse,       // malformed BIF / arc-list / protocol text
  validation,  // well-formed input that violates a model invariant
  config,      // unknown method tag or bad option value
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the line-oriented readers; carries the 1-based line number.
class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& what)
      : Error(ErrorKind::format, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace bnci
