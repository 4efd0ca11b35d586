// Copyright 2026 The Attrguard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ATTRGUARD_STATUS_H_
#define ATTRGUARD_STATUS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace attrguard {

enum class ErrorCode {
  kInvalidArgument,
  kEmptyInput,
  kBackendUnreachable,
  kLogprobsUnsupported,
  kAttentionUnsupported,
  kEmbeddingsUnsupported,
  kContextLengthExceeded,
  kProviderError,
  kParseError,
  kUnknownAttribute,
  kInvalidValue,
  kIoError,
  kUnboundPlaceholder,
  kAlignmentMismatch,
  kEmptyVocabulary,
  kAnchorNotFound,
  kLengthMismatch,
  kMissingK,
  kIncompleteRun,
  kConfigInvalid,
  kRunNotFound,
  kCapabilityMismatch,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kBackendUnreachable: return "backend-unreachable";
    case ErrorCode::kLogprobsUnsupported: return "logprobs-unsupported";
    case ErrorCode::kAttentionUnsupported: return "attention-unsupported";
    case ErrorCode::kEmbeddingsUnsupported: return "embeddings-unsupported";
    case ErrorCode::kContextLengthExceeded: return "context-length-exceeded";
    case ErrorCode::kProviderError: return "provider-error";
    case ErrorCode::kParseError: return "parse-error";
    case ErrorCode::kUnknownAttribute: return "unknown-attribute";
    case ErrorCode::kInvalidValue: return "invalid-value";
    case ErrorCode::kIoError: return "io-error";
    case ErrorCode::kUnboundPlaceholder: return "unbound-placeholder";
    case ErrorCode::kAlignmentMismatch: return "alignment-mismatch";
    case ErrorCode::kEmptyVocabulary: return "empty-vocabulary";
    case ErrorCode::kAnchorNotFound: return "anchor-not-found";
    case ErrorCode::kLengthMismatch: return "length-mismatch";
    case ErrorCode::kMissingK: return "missing-k";
    case ErrorCode::kIncompleteRun: return "incomplete-run";
    case ErrorCode::kConfigInvalid: return "config-invalid";
    case ErrorCode::kRunNotFound: return "run-not-found";
    case ErrorCode::kCapabilityMismatch: return "capability-mismatch";
  }
  return "unknown";
}

// Every failure raised by the library carries one of the codes above so the
// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const { return code_; }
  // Message without the code prefix.
  const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

// Errors that mean "this provider cannot serve the request" as opposed to bad
// input data.
inline bool IsProviderError(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBackendUnreachable:
    case ErrorCode::kLogprobsUnsupported:
    case ErrorCode::kAttentionUnsupported:
    case ErrorCode::kEmbeddingsUnsupported:
    case ErrorCode::kContextLengthExceeded:
    case ErrorCode::kProviderError:
    case ErrorCode::kCapabilityMismatch:
      return true;
    default:
      return false;
  }
}

}  // namespace attrguard

#endif  // ATTRGUARD_STATUS_H_
