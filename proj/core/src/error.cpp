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

#include "spmdw/error.hpp"

namespace spmdw {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::CycleDetected: return "CYCLE_DETECTED";
    case ErrorCode::MultipleRoots: return "MULTIPLE_ROOTS";
    case ErrorCode::LevelSkip: return "LEVEL_SKIP";
    case ErrorCode::DanglingParent: return "DANGLING_PARENT";
    case ErrorCode::DuplicateId: return "DUPLICATE_ID";
    case ErrorCode::InvalidMetadata: return "INVALID_METADATA";
    case ErrorCode::UnknownUnit: return "UNKNOWN_UNIT";
    case ErrorCode::UnknownElement: return "UNKNOWN_ELEMENT";
    case ErrorCode::UnknownDataset: return "UNKNOWN_DATASET";
    case ErrorCode::UnknownIndicator: return "UNKNOWN_INDICATOR";
    case ErrorCode::UnknownProgram: return "UNKNOWN_PROGRAM";
    case ErrorCode::UnknownUser: return "UNKNOWN_USER";
    case ErrorCode::MalformedPeriodKey: return "MALFORMED_PERIOD_KEY";
    case ErrorCode::PeriodTypeMismatch: return "PERIOD_TYPE_MISMATCH";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::ForeignElement: return "FOREIGN_ELEMENT";
    case ErrorCode::ZeroDenominator: return "ZERO_DENOMINATOR";
    case ErrorCode::MissingNumerator: return "MISSING_NUMERATOR";
    case ErrorCode::MissingDenominator: return "MISSING_DENOMINATOR";
    case ErrorCode::InvalidQuery: return "INVALID_QUERY";
    case ErrorCode::ScopeDenied: return "SCOPE_DENIED";
    case ErrorCode::RoleDenied: return "ROLE_DENIED";
    case ErrorCode::WrongLevel: return "WRONG_LEVEL";
    case ErrorCode::BlockedByQuality: return "BLOCKED_BY_QUALITY";
    case ErrorCode::IllegalTransition: return "ILLEGAL_TRANSITION";
    case ErrorCode::MissingReason: return "MISSING_REASON";
    case ErrorCode::UnjustifiedDeviation: return "UNJUSTIFIED_DEVIATION";
    case ErrorCode::LocalQualityBlock: return "LOCAL_QUALITY_BLOCK";
    case ErrorCode::MalformedRecord: return "MALFORMED_RECORD";
    case ErrorCode::CursorAhead: return "CURSOR_AHEAD";
    case ErrorCode::AlreadyResolved: return "ALREADY_RESOLVED";
    case ErrorCode::UnknownTicket: return "UNKNOWN_TICKET";
    case ErrorCode::MalformedSchedule: return "MALFORMED_SCHEDULE";
    case ErrorCode::MalformedFile: return "MALFORMED_FILE";
    case ErrorCode::ImportAborted: return "IMPORT_ABORTED";
    case ErrorCode::StorageError: return "STORAGE_ERROR";
    case ErrorCode::BadCredentials: return "BAD_CREDENTIALS";
    case ErrorCode::Unauthenticated: return "UNAUTHENTICATED";
    case ErrorCode::TokenExpired: return "TOKEN_EXPIRED";
    case ErrorCode::MalformedRequest: return "MALFORMED_REQUEST";
    case ErrorCode::NotFound: return "NOT_FOUND";
    case ErrorCode::MethodNotAllowed: return "METHOD_NOT_ALLOWED";
    case ErrorCode::Internal: return "INTERNAL";
  }
  return "INTERNAL";
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadCredentials:
    case ErrorCode::Unauthenticated:
    case ErrorCode::TokenExpired:
      return 401;
    case ErrorCode::ScopeDenied:
    case ErrorCode::RoleDenied:
      return 403;
    case ErrorCode::UnknownUnit:
    case ErrorCode::UnknownElement:
    case ErrorCode::UnknownDataset:
    case ErrorCode::UnknownIndicator:
    case ErrorCode::UnknownProgram:
    case ErrorCode::UnknownUser:
    case ErrorCode::UnknownTicket:
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::MethodNotAllowed:
      return 405;
    case ErrorCode::WrongLevel:
    case ErrorCode::IllegalTransition:
    case ErrorCode::CursorAhead:
    case ErrorCode::AlreadyResolved:
      return 409;
    case ErrorCode::BlockedByQuality:
    case ErrorCode::UnjustifiedDeviation:
    case ErrorCode::LocalQualityBlock:
    case ErrorCode::ImportAborted:
    case ErrorCode::ZeroDenominator:
    case ErrorCode::MissingNumerator:
    case ErrorCode::MissingDenominator:
      return 422;
    case ErrorCode::StorageError:
    case ErrorCode::Internal:
      return 500;
    case ErrorCode::CycleDetected:
    case ErrorCode::MultipleRoots:
    case ErrorCode::LevelSkip:
    case ErrorCode::DanglingParent:
    case ErrorCode::DuplicateId:
    case ErrorCode::InvalidMetadata:
    case ErrorCode::MalformedPeriodKey:
    case ErrorCode::PeriodTypeMismatch:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ForeignElement:
    case ErrorCode::InvalidQuery:
    case ErrorCode::MissingReason:
    case ErrorCode::MalformedRecord:
    case ErrorCode::MalformedSchedule:
    case ErrorCode::MalformedFile:
    case ErrorCode::MalformedRequest:
      return 400;
  }
  return 500;
}

}  // namespace spmdw
