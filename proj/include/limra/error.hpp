#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace limra {

/// Broad failure classes. The CLI maps these onto its exit codes.
enum class ErrorCategory {
  kConfig,      // bad flags, bad settings, bad registry entries
  kBackend,     // scorer or LLM backend failed
  kData,        // missing or malformed input data
  kDegenerate,  // input that cannot be scored (empty claim, empty matrix)
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ErrorCategory category() const noexcept = 0;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  ErrorCategory category() const noexcept override { return ErrorCategory::kConfig; }
};

class DataError : public Error {
 public:
  using Error::Error;
  ErrorCategory category() const noexcept override { return ErrorCategory::kData; }
};

class UnknownDatasetError : public DataError {
 public:
  explicit UnknownDatasetError(const std::string& dataset_id)
      : DataError("unknown dataset_id '" + dataset_id + "'"), dataset_id_(dataset_id) {}
  const std::string& dataset_id() const noexcept { return dataset_id_; }

 private:
  std::string dataset_id_;
};

/// A raw label that does not fit the dataset's declared label scheme.
class LabelSchemeError : public DataError {
 public:
  LabelSchemeError(std::string field, const std::string& message)
      : DataError(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
  ErrorCategory category() const noexcept override { return ErrorCategory::kDegenerate; }
};

class SingleClassError : public DegenerateInputError {
 public:
  SingleClassError() : DegenerateInputError("metric needs at least one positive and one negative label") {}
};

class BackendError : public Error {
 public:
  using Error::Error;
  ErrorCategory category() const noexcept override { return ErrorCategory::kBackend; }
};

/// Network-level failure that persisted through every retry.
class TransportError : public BackendError {
 public:
  TransportError(const std::string& message, int attempts)
      : BackendError(message + " (after " + std::to_string(attempts) + " attempt(s))"), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

/// Backend returned a grid whose dimensions disagree with the request.
class ShapeError : public BackendError {
 public:
  ShapeError(std::size_t expected_sentences, std::size_t expected_chunks, std::size_t actual_sentences,
             std::size_t actual_chunks)
      : BackendError("alignment shape mismatch: expected " + std::to_string(expected_sentences) + "x" +
                     std::to_string(expected_chunks) + ", got " + std::to_string(actual_sentences) + "x" +
                     std::to_string(actual_chunks)),
        expected_sentences_(expected_sentences),
        expected_chunks_(expected_chunks),
        actual_sentences_(actual_sentences),
        actual_chunks_(actual_chunks) {}
  ShapeError(const std::string& message) : BackendError(message) {}

  std::size_t expected_sentences() const noexcept { return expected_sentences_; }
  std::size_t expected_chunks() const noexcept { return expected_chunks_; }
  std::size_t actual_sentences() const noexcept { return actual_sentences_; }
  std::size_t actual_chunks() const noexcept { return actual_chunks_; }

 private:
  std::size_t expected_sentences_ = 0;
  std::size_t expected_chunks_ = 0;
  std::size_t actual_sentences_ = 0;
  std::size_t actual_chunks_ = 0;
};

/// Probability triple that is negative or does not sum to one.
class InvariantError : public BackendError {
 public:
  using BackendError::BackendError;
};

class FixtureLookupError : public BackendError {
 public:
  explicit FixtureLookupError(const std::string& key)
      : BackendError("no recorded alignment for sample '" + key + "'"), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// The remote service answered 4xx; retrying will not help.
class RemoteRejectedError : public BackendError {
 public:
  RemoteRejectedError(int status, const std::string& body)
      : BackendError("remote rejected request with status " + std::to_string(status) + ": " + body),
        status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

/// Wraps any scoring failure with the identity of the sample being scored.
class ScoringError : public Error {
 public:
  ScoringError(std::string sample_id, ErrorCategory cause, const std::string& message)
      : Error("sample '" + sample_id + "': " + message), sample_id_(std::move(sample_id)), cause_(cause) {}
  ErrorCategory category() const noexcept override { return cause_; }
  const std::string& sample_id() const noexcept { return sample_id_; }

 private:
  std::string sample_id_;
  ErrorCategory cause_;
};

const char* to_string(ErrorCategory category) noexcept;

}  // namespace limra
