#pragma once

#include <stdexcept>
#include <string>

namespace lidkit {

// Base of every error the toolkit throws. `kind()` lets the CLI map
// failures onto exit codes without a chain of catch clauses.
class Error : public std::runtime_error {
 public:
  enum class Kind { Validation, Data, Io };

  Error(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(Kind::Validation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(Kind::Io, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(Kind::Data, what) {}
};

/// A corpus line did not follow the `__label__<code> <text>` convention.
class CorpusFormatError : public DataError {
 public:
  using DataError::DataError;
};

/// A sentence produced no features, so no sentence vector exists.
class NoFeatures : public DataError {
 public:
  NoFeatures() : DataError("sentence has no features") {}
};

class NoLabels : public DataError {
 public:
  NoLabels() : DataError("corpus yields zero labels") {}
};

class UnsupportedFormat : public DataError {
 public:
  using DataError::DataError;
};

class CorruptModel : public DataError {
 public:
  using DataError::DataError;
};

class UnmappedLabel : public DataError {
 public:
  explicit UnmappedLabel(const std::string& label)
      : DataError("label has no mapping: " + label), label_(label) {}
  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

class InputMismatch : public DataError {
 public:
  using DataError::DataError;
};

class EmptyScope : public DataError {
 public:
  EmptyScope() : DataError("evaluation scope is empty") {}
};

}  // namespace lidkit
