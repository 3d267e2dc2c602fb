// src/error.cpp

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

#include "ctcfuse/error.hpp"

#include <cstdlib>
#include <mutex>
#include <string>

#include "ctcfuse/log.hpp"

namespace ctcfuse {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEmptySignal: return "EmptySignal";
    case ErrorKind::kDegenerateUtterance: return "DegenerateUtterance";
    case ErrorKind::kZeroPowerSignal: return "ZeroPowerSignal";
    case ErrorKind::kSingularAlignment: return "SingularAlignment";
    case ErrorKind::kInsufficientData: return "InsufficientData";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kOffsetTooLarge: return "OffsetTooLarge";
    case ErrorKind::kCacheMismatch: return "CacheMismatch";
    case ErrorKind::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorKind::kInfeasibleLabelSequence: return "InfeasibleLabelSequence";
    case ErrorKind::kInstanceTooLarge: return "InstanceTooLarge";
    case ErrorKind::kAlphabetMismatch: return "AlphabetMismatch";
    case ErrorKind::kNoPathFound: return "NoPathFound";
    case ErrorKind::kEmptyReference: return "EmptyReference";
    case ErrorKind::kIncompleteMap: return "IncompleteMap";
    case ErrorKind::kNoMatchedPairs: return "NoMatchedPairs";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kIoError: return "IoError";
    case ErrorKind::kConfigError: return "ConfigError";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

void InitLogging() {
  static std::once_flag once;
  std::call_once(once, [] {
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("CTCFUSE_LOG")) {
      spdlog::set_level(spdlog::level::from_str(env));
    }
  });
}

}  // namespace ctcfuse
