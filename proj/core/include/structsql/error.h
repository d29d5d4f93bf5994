#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace structsql {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// schema loading
class MalformedDocument : public Error {
 public:
  using Error::Error;
};
class DanglingReference : public Error {
 public:
  using Error::Error;
};
class DuplicateName : public Error {
 public:
  using Error::Error;
};

// serialization
class UnknownLinkTarget : public Error {
 public:
  using Error::Error;
};

// decoding
class Untokenizable : public Error {
 public:
  using Error::Error;
};
class NoValidHypothesis : public Error {
 public:
  using Error::Error;
};
class TransportError : public Error {
 public:
  using Error::Error;
};
class ProtocolViolation : public Error {
 public:
  using Error::Error;
};
class TimeoutError : public TransportError {
 public:
  using TransportError::TransportError;
};

// sql
class SqlSyntaxError : public Error {
 public:
  SqlSyntaxError(std::size_t position, const std::string& what)
      : Error("syntax error at " + std::to_string(position) + ": " + what),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// A reference that does not agree with the schema. Eval tallies these as
/// schema violations rather than parse failures.
class SchemaViolation : public Error {
 public:
  using Error::Error;
};
class UnresolvableColumn : public SchemaViolation {
 public:
  using SchemaViolation::SchemaViolation;
};
class AmbiguousColumn : public SchemaViolation {
 public:
  using SchemaViolation::SchemaViolation;
};
class UnknownTable : public SchemaViolation {
 public:
  using SchemaViolation::SchemaViolation;
};

// completion
class Disconnected : public Error {
 public:
  using Error::Error;
};
class MissingJoinKey : public Error {
 public:
  using Error::Error;
};

// evaluation
class EmptyCorpus : public Error {
 public:
  using Error::Error;
};
class MismatchedLengths : public Error {
 public:
  using Error::Error;
};

/// Configuration problems surfaced by the pipeline driver (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Wraps an error raised inside a pipeline stage with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace structsql
