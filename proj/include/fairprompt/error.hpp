// Copyright 2026 The fairprompt Authors
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

namespace fairprompt {

/// Every failure the library reports is an `Error` carrying one of these
/// codes. The CLI maps code families onto process exit codes.
enum class ErrorCode {
  // corpus
  MalformedRecord,
  MissingField,
  UnknownDataset,
  EmptyCorpus,
  IoFailure,
  SchemaVersionMismatch,
  // gateway
  Timeout,
  AuthFailure,
  RateLimited,
  ProviderError,
  CacheCorrupt,
  UnknownPolicy,
  // extraction / metrics
  MissingGold,
  ZeroTrials,
  EmptyPairs,
  OutOfRange,
  NoMeaningfulAnswers,
  EmptyScores,
  ZeroTotal,
  ZeroBaseline,
  EmptyInput,
  // pipeline / baselines
  EmptyDevSet,
  EmptyReasoning,
  EmptyMembers,
  NoCandidates,
  NoManualEntry,
  UnknownFamily,
  // harness
  MissingBaseline,
  IncomparableRuns,
  ConfigError,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::UnknownDataset: return "UnknownDataset";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::AuthFailure: return "AuthFailure";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::ProviderError: return "ProviderError";
    case ErrorCode::CacheCorrupt: return "CacheCorrupt";
    case ErrorCode::UnknownPolicy: return "UnknownPolicy";
    case ErrorCode::MissingGold: return "MissingGold";
    case ErrorCode::ZeroTrials: return "ZeroTrials";
    case ErrorCode::EmptyPairs: return "EmptyPairs";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NoMeaningfulAnswers: return "NoMeaningfulAnswers";
    case ErrorCode::EmptyScores: return "EmptyScores";
    case ErrorCode::ZeroTotal: return "ZeroTotal";
    case ErrorCode::ZeroBaseline: return "ZeroBaseline";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyDevSet: return "EmptyDevSet";
    case ErrorCode::EmptyReasoning: return "EmptyReasoning";
    case ErrorCode::EmptyMembers: return "EmptyMembers";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::NoManualEntry: return "NoManualEntry";
    case ErrorCode::UnknownFamily: return "UnknownFamily";
    case ErrorCode::MissingBaseline: return "MissingBaseline";
    case ErrorCode::IncomparableRuns: return "IncomparableRuns";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Provider failures keep the HTTP status and body around for diagnostics.
class ProviderFailure : public Error {
 public:
  ProviderFailure(ErrorCode code, int status, std::string body)
      : Error(code, "status " + std::to_string(status) + ": " + body),
        status_(status),
        body_(std::move(body)) {}

  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

/// Process exit status for a failure: 2 configuration, 3 provider,
/// 4 validation of data or results.
constexpr int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnknownDataset:
    case ErrorCode::UnknownPolicy:
    case ErrorCode::UnknownFamily:
    case ErrorCode::IoFailure:
      return 2;
    case ErrorCode::Timeout:
    case ErrorCode::AuthFailure:
    case ErrorCode::RateLimited:
    case ErrorCode::ProviderError:
    case ErrorCode::CacheCorrupt:
      return 3;
    default:
      return 4;
  }
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace fairprompt
