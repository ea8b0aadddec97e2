#pragma once

#include <stdexcept>
#include <string>

namespace tokenscope {

// Coarse failure classes. The CLI maps each one to an exit code.
enum class ErrorKind {
  kUsage,
  kIo,
  kData,
  kDegenerate,
  kInternal,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorKind::kIo, message) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message) : Error(ErrorKind::kData, message) {}
};

// Malformed file content. `location` is a line number ("line 3") or a field
// path ("terms[2].knots[4]").
class ParseError : public DataError {
 public:
  ParseError(const std::string& location, const std::string& message)
      : DataError(location + ": " + message), location_(location) {}

  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& message)
      : Error(ErrorKind::kDegenerate, message) {}
};

// Text tokenized to nothing.
class EmptyPromptError : public DegenerateInputError {
 public:
  EmptyPromptError() : DegenerateInputError("empty prompt: no tokens after tokenization") {}
  explicit EmptyPromptError(const std::string& message) : DegenerateInputError(message) {}
};

class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& message)
      : Error(ErrorKind::kInternal, message) {}
};

}  // namespace tokenscope
