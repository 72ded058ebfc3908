#pragma once

#include <stdexcept>
#include <string>

namespace ievlab {

/// Base class of every error raised by the library. `kind()` is the stable,
/// machine-readable tag reported by the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what) : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error("invalid_input", what) {}
};

class ProtocolViolation : public Error {
 public:
  explicit ProtocolViolation(const std::string& what) : Error("protocol_violation", what) {}
};

class DegenerateData : public Error {
 public:
  explicit DegenerateData(const std::string& what) : Error("degenerate_data", what) {}
};

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& what) : Error("not_found", what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error("format_error", what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error("parse_error", what) {}
};

}  // namespace ievlab
