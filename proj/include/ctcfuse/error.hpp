// include/ctcfuse/error.hpp

// Copyright 2026  The ctcfuse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef CTCFUSE_ERROR_HPP_
#define CTCFUSE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace ctcfuse {

enum class ErrorKind {
  // features
  kEmptySignal,
  kDegenerateUtterance,
  kZeroPowerSignal,
  kSingularAlignment,
  kInsufficientData,
  kDimensionMismatch,
  kLengthMismatch,
  kOffsetTooLarge,
  // model
  kCacheMismatch,
  kNonFiniteGradient,
  // ctc
  kInfeasibleLabelSequence,
  kInstanceTooLarge,
  // decode
  kAlphabetMismatch,
  kNoPathFound,
  kEmptyReference,
  // corpus / alignment
  kIncompleteMap,
  kNoMatchedPairs,
  // io and configuration
  kParseError,
  kIoError,
  kConfigError,
  kInvalidArgument,
};

std::string_view ErrorKindName(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so that
/// callers (and the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace ctcfuse

#endif  // CTCFUSE_ERROR_HPP_
