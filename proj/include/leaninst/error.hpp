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

#ifndef LEANINST_ERROR_HPP_
#define LEANINST_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace leaninst {

// Every failure surfaced by the library carries one of these codes. The C API
// maps them one-to-one onto leaninst_status values.
enum class ErrorCode {
  kInvalidArgument = 1,
  kConfig,
  kIo,
  kNotFound,
  // llm_gateway
  kUnknownTemplate,
  kMissingBinding,
  kBackendUnavailable,
  kReplayMiss,
  kTimeout,
  kEmptyCompletion,
  // lean_driver
  kCheckerUnavailable,
  kWorkspaceInvalid,
  kCheckerTimeout,
  // template_store
  kMissingAsset,
  kRoleAnnotationInvalid,
  kDuplicateId,
  kUnknownClass,
  kSchemaViolation,
  // skeleton_builder
  kGenerationExhausted,
  // postprocessor
  kEmptySource,
  // evaluator
  kMissingProblem,
  kMvInconclusive,
  kEmptyRunSet,
  kInternal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Gateway failures form their own family so the repair loop can stop cleanly
// without swallowing checker or I/O errors.
class GatewayError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace leaninst

#endif  // LEANINST_ERROR_HPP_
