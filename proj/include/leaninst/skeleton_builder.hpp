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

#ifndef LEANINST_SKELETON_BUILDER_HPP_
#define LEANINST_SKELETON_BUILDER_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "leaninst/llm_gateway.hpp"
#include "leaninst/template_store.hpp"

namespace leaninst {

struct SkeletonAttempt {
  int attempt = 0;  // 1-based
  std::string transcript;
  std::string source;  // empty when discarded
  bool accepted = false;
  std::string reason;  // why an attempt was discarded
};

struct Skeleton {
  std::string source;
  std::string problem_id;
  int generation_attempt = 0;
  std::string provenance;  // transcript request id
  std::vector<SkeletonAttempt> attempts;
};

// Snippet lines first, then `code` with any line equal to a snippet line
// removed.
std::string compose_skeleton(const Snippets& snippets, std::string_view code);

// Renders the backbone prompt and samples up to `max_attempts` completions
// (sample index = attempt - 1). An attempt with no declaration keyword or an
// empty completion is discarded. Throws kGenerationExhausted when every
// attempt is discarded; gateway errors propagate.
Skeleton build_skeleton(const ProblemSpec& problem, const Template& tmpl, std::string_view example,
                        GatewaySession& session, const PromptLibrary& prompts,
                        int max_attempts = 3);

}  // namespace leaninst

#endif  // LEANINST_SKELETON_BUILDER_HPP_
