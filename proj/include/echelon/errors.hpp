#pragma once

#include <stdexcept>
#include <string>

namespace echelon {

// Process exit codes used by the CLI. Each error family maps to one code.
enum class ExitCode : int {
  ok = 0,
  unexpected = 1,
  config = 2,
  protocol = 3,
  backend = 4,
  io = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Invalid scenario, run configuration or unknown names.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::config, what) {}
};

/// Call sequence violated (duplicate order, advancing too early, reading an unfinished episode).
class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what) : Error(ExitCode::protocol, what) {}
};

/// Argument outside the valid domain (negative order, wrong vector dimension, period out of range).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ExitCode::config, what) {}
};

class TemplateError : public Error {
 public:
  explicit TemplateError(const std::string& what) : Error(ExitCode::config, what) {}
};

class BackendError : public Error {
 public:
  explicit BackendError(const std::string& what) : Error(ExitCode::backend, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ExitCode::io, what) {}
};

/// Memory-log ingestion failure; the message lists offending line numbers.
class IngestError : public Error {
 public:
  explicit IngestError(const std::string& what) : Error(ExitCode::io, what) {}
};

/// A metric is undefined for its inputs (relative gap against a zero optimum).
class MetricError : public Error {
 public:
  explicit MetricError(const std::string& what) : Error(ExitCode::config, what) {}
};

}  // namespace echelon
