#pragma once

#include <stdexcept>
#include <string>

namespace zsp {

/// Raised by application logic when a method call is rejected.
class DomainException : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A logical form could not be turned into a denotation or method call.
class ExecutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two states from different domains were compared.
class CrossDomainError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed logical-form text.
class SyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input files or configuration failed validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace zsp
