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

#ifndef LEANINST_POSTPROCESSOR_HPP_
#define LEANINST_POSTPROCESSOR_HPP_

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "leaninst/lean_driver.hpp"
#include "leaninst/llm_gateway.hpp"
#include "leaninst/repair_engine.hpp"

namespace leaninst {

struct CommentedDecl {
  std::string name;
  DeclCategory category = DeclCategory::kDefinition;
};

struct FinalArtifact {
  std::string source;
  bool fully_proved = false;
  std::vector<std::string> sorried_decls;
  std::vector<std::string> commented_out_decls;
  std::vector<CommentedDecl> commented;
  bool harmless = false;
  // 0 = already clean, 1..3 = phase that produced the result, -1 = failed.
  int phase = 0;
  int errors = 0;
  int llm_attempts = 0;
  std::string failure_report;
};

// True when an identifier token of `text` is `name`, starts with `name.`, or
// ends with `.<last component of name>`.
bool references_name(std::string_view text, std::string_view name);

// Replaces the proof body of `span` from the top-level tactic enclosing
// `error_line` (or from the delimiter for term proofs and errors on the
// delimiter line) with `sorry`. For `where` bodies only the enclosing field
// is replaced. Returns `src` unchanged when the span has no body or the error
// sits before the delimiter.
std::string sorry_out_proof(std::string_view src, const DeclSpan& span, int error_line);

// Names reachable from `seeds` through references_name, over non-preamble
// spans.
std::set<std::string> comment_closure(std::string_view src, const std::vector<DeclSpan>& spans,
                                      const std::set<std::string>& seeds);

// Prefixes every line of the named spans with `-- `.
std::string comment_out(std::string_view src, const std::vector<DeclSpan>& spans,
                        const std::set<std::string>& names);

struct Backtranslation {
  std::string report;
  int expected_blocks = 0;
  int found_blocks = 0;
  bool count_matches = false;
};

// Titled blocks: LaTeX theorem-like environments and markdown headings.
int count_titled_blocks(std::string_view report);

class Postprocessor {
 public:
  Postprocessor(RepairEngine& engine, const PromptLibrary& prompts, int max_final_fix_attempts = 2);

  FinalArtifact harmless_fix(std::string_view src, GatewaySession& session, std::string_view label);
  Backtranslation backtranslate(std::string_view src, GatewaySession& session);

 private:
  RepairEngine& engine_;
  const PromptLibrary& prompts_;
  int max_attempts_;
};

}  // namespace leaninst

#endif  // LEANINST_POSTPROCESSOR_HPP_
