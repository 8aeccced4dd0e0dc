#pragma once

#include <stdexcept>
#include <string>

namespace specnet {

/// Machine-readable failure class. The CLI prints the category name on its
/// error line and maps it to the process exit code.
enum class ErrorCategory {
  kInput,
  kParse,
  kState,
  kDivergence,
  kDegenerate,
  kRank,
  kNotSpd,
  kIo,
  kConfig,
};

const char* to_string(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& m) : Error(ErrorCategory::kInput, m) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& m) : Error(ErrorCategory::kParse, m) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& m) : Error(ErrorCategory::kState, m) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& m) : Error(ErrorCategory::kDivergence, m) {}
};

class DegenerateError : public Error {
 public:
  explicit DegenerateError(const std::string& m)
      : Error(ErrorCategory::kDegenerate, m) {}
};

class RankError : public Error {
 public:
  explicit RankError(const std::string& m) : Error(ErrorCategory::kRank, m) {}
};

class NotSpdError : public Error {
 public:
  explicit NotSpdError(const std::string& m) : Error(ErrorCategory::kNotSpd, m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error(ErrorCategory::kIo, m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error(ErrorCategory::kConfig, m) {}
};

}  // namespace specnet
