#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crowdcount {

// Bad argument or configuration supplied by the caller.
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input file. Carries the 1-based line number of the offending line.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// Failure reported by (or while talking to) an inference backend.
class BackendError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A backend answered with a line that does not follow the protocol.
class ProtocolError : public BackendError {
public:
  ProtocolError(const std::string& what, std::string raw_line)
      : BackendError(what + ": " + raw_line), raw_line_(std::move(raw_line)) {}

  const std::string& raw_line() const noexcept { return raw_line_; }

private:
  std::string raw_line_;
};

}  // namespace crowdcount
