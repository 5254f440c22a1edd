// Copyright 2026 The QACE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
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

namespace qace {

// Every failure the engine reports carries one of these kinds so callers
// (the CLI in particular) can map them to exit codes without string matching.
enum class ErrorKind {
  kEmptyCaption,
  kNoAnswerCandidates,
  kNoReferences,
  kBackendUnavailable,
  kProtocolViolation,
  kUnknownImage,
  kScriptedMiss,
  kCacheError,
  kComponentUnavailable,
  kNegativeSamplingImpossible,
  kSchemaViolation,
  kRecordError,
  kDegenerateVariance,
  kInsufficientSamples,
  kAlignmentError,
  kConfigError,
  kFeatureShapeError,
};

inline std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEmptyCaption: return "EmptyCaption";
    case ErrorKind::kNoAnswerCandidates: return "NoAnswerCandidates";
    case ErrorKind::kNoReferences: return "NoReferences";
    case ErrorKind::kBackendUnavailable: return "BackendUnavailable";
    case ErrorKind::kProtocolViolation: return "ProtocolViolation";
    case ErrorKind::kUnknownImage: return "UnknownImage";
    case ErrorKind::kScriptedMiss: return "ScriptedMiss";
    case ErrorKind::kCacheError: return "CacheError";
    case ErrorKind::kComponentUnavailable: return "ComponentUnavailable";
    case ErrorKind::kNegativeSamplingImpossible:
      return "NegativeSamplingImpossible";
    case ErrorKind::kSchemaViolation: return "SchemaViolation";
    case ErrorKind::kRecordError: return "RecordError";
    case ErrorKind::kDegenerateVariance: return "DegenerateVariance";
    case ErrorKind::kInsufficientSamples: return "InsufficientSamples";
    case ErrorKind::kAlignmentError: return "AlignmentError";
    case ErrorKind::kConfigError: return "ConfigError";
    case ErrorKind::kFeatureShapeError: return "FeatureShapeError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by loaders; keeps the 1-based line number of the offending record.
class SchemaViolation : public Error {
 public:
  SchemaViolation(std::size_t line, const std::string& message)
      : Error(ErrorKind::kSchemaViolation,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace qace
