// Copyright 2026 The spmdw Authors
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

#include <nlohmann/json.hpp>

namespace spmdw {

// Every failure the library can raise. The wire name and HTTP status of each
// code are frozen in error.cpp; append new codes, never renumber or rename.
enum class ErrorCode {
  // metadata / tree
  CycleDetected,
  MultipleRoots,
  LevelSkip,
  DanglingParent,
  DuplicateId,
  InvalidMetadata,
  UnknownUnit,
  UnknownElement,
  UnknownDataset,
  UnknownIndicator,
  UnknownProgram,
  UnknownUser,
  MalformedPeriodKey,
  PeriodTypeMismatch,
  InvalidArgument,
  // quality
  ForeignElement,
  // aggregation / analytics
  ZeroDenominator,
  MissingNumerator,
  MissingDenominator,
  InvalidQuery,
  // workflow
  ScopeDenied,
  RoleDenied,
  WrongLevel,
  BlockedByQuality,
  IllegalTransition,
  MissingReason,
  UnjustifiedDeviation,
  // sync
  LocalQualityBlock,
  MalformedRecord,
  CursorAhead,
  AlreadyResolved,
  UnknownTicket,
  MalformedSchedule,
  // store / io
  MalformedFile,
  ImportAborted,
  StorageError,
  // service
  BadCredentials,
  Unauthenticated,
  TokenExpired,
  MalformedRequest,
  NotFound,
  MethodNotAllowed,
  Internal,
};

std::string_view error_code_name(ErrorCode code);
int http_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, nlohmann::json details = nullptr)
      : std::runtime_error(std::move(message)),
        code_(code),
        details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

}  // namespace spmdw
