// Copyright 2026 The qaprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qaprobe {

enum class ErrorCode {
  kParse,       // malformed input file or payload
  kNotFound,    // unknown id, OOV query word
  kContract,    // caller violated a precondition
  kProtocol,    // model response broke the wire contract
  kRetryable,   // transport failure; the call may succeed later
  kEndpoint,    // model endpoint answered with a non-2xx status
  kDegenerate,  // numerically undefined input (zero vector, rank-0 data)
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
      return "parse_error";
    case ErrorCode::kNotFound:
      return "not_found";
    case ErrorCode::kContract:
      return "contract_error";
    case ErrorCode::kProtocol:
      return "protocol_error";
    case ErrorCode::kRetryable:
      return "retryable_error";
    case ErrorCode::kEndpoint:
      return "endpoint_error";
    case ErrorCode::kDegenerate:
      return "degenerate_input";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qaprobe
