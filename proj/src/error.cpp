#include "bacsum/error.hpp"

namespace bacsum {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::UnsupportedFormat: return "unsupported-format";
    case ErrorKind::TruncatedCapture: return "truncated-capture";
    case ErrorKind::MalformedBvlc: return "malformed-bvlc";
    case ErrorKind::UnsupportedBvlcFunction: return "unsupported-bvlc-function";
    case ErrorKind::MalformedNpdu: return "malformed-npdu";
    case ErrorKind::UnsupportedVersion: return "unsupported-version";
    case ErrorKind::MalformedApdu: return "malformed-apdu";
    case ErrorKind::Io: return "io";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::DuplicateRecord: return "duplicate-record";
    case ErrorKind::DuplicateEntry: return "duplicate-entry";
    case ErrorKind::DuplicateRating: return "duplicate-rating";
    case ErrorKind::NoData: return "no-data";
    case ErrorKind::NoCorpus: return "no-corpus";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::EmbedTransport: return "embed-transport";
    case ErrorKind::UndefinedSimilarity: return "undefined-similarity";
    case ErrorKind::IncompatibleIndex: return "incompatible-index";
    case ErrorKind::CorruptIndex: return "corrupt-index";
    case ErrorKind::Transport: return "transport";
    case ErrorKind::LlmUnavailable: return "llm-unavailable";
    case ErrorKind::RequestRejected: return "request-rejected";
    case ErrorKind::EmptyResponse: return "empty-response";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Configuration:
    case ErrorKind::Precondition:
      return 1;
    case ErrorKind::EmbedTransport:
    case ErrorKind::Transport:
    case ErrorKind::LlmUnavailable:
    case ErrorKind::RequestRejected:
    case ErrorKind::EmptyResponse:
      return 3;
    default:
      return 2;
  }
}

bool is_retryable(ErrorKind kind) noexcept {
  return kind == ErrorKind::Transport || kind == ErrorKind::EmbedTransport;
}

}  // namespace bacsum
