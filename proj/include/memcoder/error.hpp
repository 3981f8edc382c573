#pragma once

#include <stdexcept>
#include <string>

namespace memcoder {

// Process exit codes shared by every CLI entry point.
enum class ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kIo = 3,
  kInvariant = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::kFailure; }
};

// Misconfiguration: missing flags, bad parameter ranges, absent runner binary.
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kConfig; }
};

// Filesystem failures and malformed input documents.
class IoError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kIo; }
};

class ParseError : public IoError {
 public:
  using IoError::IoError;
};

// A store or data invariant was (or would be) broken.
class InvariantError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kInvariant; }
};

// Network or protocol failure talking to an external service.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Scripted LLM backend has no response for a request fingerprint.
class FixtureMissError : public Error {
 public:
  using Error::Error;
};

int to_int(ExitCode code) noexcept;

}  // namespace memcoder
