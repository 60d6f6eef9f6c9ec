#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace modus {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A sentence that matches no template. `offset` is the character offset of
// the clause that could not be parsed.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// A content word outside every vocabulary pool while strict mode is on.
class UnknownTokenError : public ParseError {
 public:
  UnknownTokenError(const std::string& token, std::size_t offset)
      : ParseError("unknown token '" + token + "'", offset), token_(token) {}

  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

struct LineError {
  std::size_t line = 0;  // 1-based
  std::size_t offset = 0;
  std::string message;
};

class TheoryParseError : public Error {
 public:
  explicit TheoryParseError(std::vector<LineError> errors);

  const std::vector<LineError>& errors() const noexcept { return errors_; }

 private:
  std::vector<LineError> errors_;
};

// Raised by `step` when a strategy hands back a decision that does not hold
// against the current store.
class StepError : public Error {
 public:
  enum class Kind { StaleDecision, DuplicateConclusion };

  StepError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class ProofError : public Error {
 public:
  using Error::Error;
};

class ProofFormatError : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

class MappingError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class PoolExhaustedError : public Error {
 public:
  using Error::Error;
};

// Malformed JSON record or a record that violates its schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace modus
