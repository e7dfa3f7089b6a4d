/* Copyright 2026 The leaninst Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "leaninst/error.hpp"

namespace leaninst {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kUnknownTemplate: return "UnknownTemplate";
    case ErrorCode::kMissingBinding: return "MissingBinding";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kReplayMiss: return "ReplayMiss";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kEmptyCompletion: return "EmptyCompletion";
    case ErrorCode::kCheckerUnavailable: return "CheckerUnavailable";
    case ErrorCode::kWorkspaceInvalid: return "WorkspaceInvalid";
    case ErrorCode::kCheckerTimeout: return "CheckerTimeout";
    case ErrorCode::kMissingAsset: return "MissingAsset";
    case ErrorCode::kRoleAnnotationInvalid: return "RoleAnnotationInvalid";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kUnknownClass: return "UnknownClass";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kGenerationExhausted: return "GenerationExhausted";
    case ErrorCode::kEmptySource: return "EmptySource";
    case ErrorCode::kMissingProblem: return "MissingProblem";
    case ErrorCode::kMvInconclusive: return "MVInconclusive";
    case ErrorCode::kEmptyRunSet: return "EmptyRunSet";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace leaninst
