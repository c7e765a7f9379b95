#pragma once

#include <stdexcept>
#include <string>

namespace videoqg {

// Error taxonomy shared by the library and the CLI. Each class carries the
// process exit code the CLI maps it to (0 = success, 1 = generic).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual int exit_code() const { return 1; }
};

// Bad flags, config files, unknown keys.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config: " + what) {}
  int exit_code() const override { return 2; }
};

// Dataset / file format problems.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error("data: " + what) {}
  int exit_code() const override { return 3; }
};

class BadMagicError : public DataError {
 public:
  explicit BadMagicError(const std::string& what) : DataError("bad magic: " + what) {}
};

class VersionError : public DataError {
 public:
  explicit VersionError(const std::string& what) : DataError("version: " + what) {}
};

class TruncatedFileError : public DataError {
 public:
  explicit TruncatedFileError(const std::string& what) : DataError("truncated: " + what) {}
};

class ChecksumError : public DataError {
 public:
  explicit ChecksumError(const std::string& what) : DataError("checksum: " + what) {}
};

// NaN/Inf in gradients, failed numeric checks.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error("numeric: " + what) {}
  int exit_code() const override { return 4; }
};

// Tensor shape contract violations.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error("shape: " + what) {}
};

// Out-of-range ids (vocabulary, embedding rows).
class IndexError : public Error {
 public:
  explicit IndexError(const std::string& what) : Error("index: " + what) {}
};

// An operation was invoked in a scenario that does not supply its inputs
// (e.g. cross-modal fusion without subtitles).
class ScenarioError : public Error {
 public:
  explicit ScenarioError(const std::string& what) : Error("scenario: " + what) {}
};

}  // namespace videoqg
