//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef OODSCORE_ERRORS_H_
#define OODSCORE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace oodscore {

// Base class for every error raised by the library.
class Error: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad input data or configuration (malformed rows, schema violations,
// violated preconditions).
class ValidationError: public Error {
public:
  using Error::Error;
};

// An argument outside the mathematical domain of an operation.
class DomainError: public ValidationError {
public:
  using ValidationError::ValidationError;
};

// A metric that is undefined for the given inputs (e.g. Pearson on a
// constant vector). Never silently replaced by a placeholder value.
class UndefinedMetricError: public Error {
public:
  using Error::Error;
};

// A required record field (usually an embedding) is absent.
class MissingEmbeddingError: public ValidationError {
public:
  MissingEmbeddingError(std::string id, const std::string &what)
      : ValidationError(what), id_(std::move(id)) { }

  const std::string &id() const noexcept { return id_; }

private:
  std::string id_;
};

// A serialized artifact could not be decoded.
class FormatError: public Error {
public:
  using Error::Error;
};

// Training diverged or otherwise failed at runtime.
class TrainingError: public Error {
public:
  using Error::Error;
};

// A pipeline command was invoked before the command producing its inputs.
class PrerequisiteError: public Error {
public:
  using Error::Error;
};

}  // namespace oodscore

#endif  // OODSCORE_ERRORS_H_
