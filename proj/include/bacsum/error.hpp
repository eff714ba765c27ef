#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bacsum {

enum class ErrorKind {
  // capture / codec
  UnsupportedFormat,
  TruncatedCapture,
  MalformedBvlc,
  UnsupportedBvlcFunction,
  MalformedNpdu,
  UnsupportedVersion,
  MalformedApdu,
  // loaders
  Io,
  Validation,
  DuplicateRecord,
  DuplicateEntry,
  DuplicateRating,
  NoData,
  NoCorpus,
  // retrieval
  Precondition,
  Configuration,
  EmbedTransport,
  UndefinedSimilarity,
  IncompatibleIndex,
  CorruptIndex,
  // chat endpoint
  Transport,
  LlmUnavailable,
  RequestRejected,
  EmptyResponse,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Process exit code contract: 1 usage/config, 2 input format, 3 external service.
int exit_code_for(ErrorKind kind) noexcept;

/// True for transport-level failures that a caller may retry.
bool is_retryable(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bacsum
