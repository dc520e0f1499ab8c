// Copyright 2026 The qlbi Authors
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

namespace qlbi {

enum class ErrorKind {
  kInvalidArgument,
  kBasisDegenerate,
  kProjectionDegenerate,
  kLengthMismatch,
  kEnumerationOverflow,
  kDecodeIntegrity,
  kDerivativeFailure,
  kEstimationImpossible,
  kPrecondition,
  kInternal,
};

std::string_view error_kind_name(ErrorKind kind);

/// Every failure raised by the library carries a kind so that callers (the
/// CLI in particular) can map it onto an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kBasisDegenerate: return "basis-degenerate";
    case ErrorKind::kProjectionDegenerate: return "projection-degenerate";
    case ErrorKind::kLengthMismatch: return "length-mismatch";
    case ErrorKind::kEnumerationOverflow: return "enumeration-overflow";
    case ErrorKind::kDecodeIntegrity: return "decode-integrity";
    case ErrorKind::kDerivativeFailure: return "derivative-failure";
    case ErrorKind::kEstimationImpossible: return "estimation-impossible";
    case ErrorKind::kPrecondition: return "precondition";
    case ErrorKind::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace qlbi
