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

#include "leaninst/skeleton_builder.hpp"

#include <algorithm>
#include <set>

#include "leaninst/error.hpp"
#include "leaninst/lean_driver.hpp"
#include "leaninst/text.hpp"

namespace leaninst {

std::string compose_skeleton(const Snippets& snippets, std::string_view code) {
  const std::set<std::string_view> snippet_lines(snippets.ordered.begin(), snippets.ordered.end());
  std::vector<std::string> body;
  for (std::string_view l : text::split_lines(code)) {
    if (snippet_lines.count(text::rtrim(l))) continue;
    body.emplace_back(l);
  }
  while (!body.empty() && text::is_blank(body.front())) body.erase(body.begin());
  while (!body.empty() && text::is_blank(body.back())) body.pop_back();

  std::string out;
  for (const auto& s : snippets.ordered) out += s + "\n";
  if (!out.empty() && !body.empty()) out += "\n";
  out += text::join_lines(body, !body.empty());
  return out;
}

Skeleton build_skeleton(const ProblemSpec& problem, const Template& tmpl, std::string_view example,
                        GatewaySession& session, const PromptLibrary& prompts, int max_attempts) {
  const std::string prompt = prompts.render(prompt_ids::kBackbone,
                                            {{"problem", problem.description},
                                             {"lean_structure", tmpl.lean_source},
                                             {"lean_example", std::string(example)}});
  Skeleton sk;
  sk.problem_id = problem.id;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    const Completion c = session.complete(prompt, attempt - 1);
    SkeletonAttempt a;
    a.attempt = attempt;
    a.transcript = c.request_id;
    std::string code;
    try {
      code = extract_code_block(c.text);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyCompletion) throw;
      a.reason = "empty completion";
      sk.attempts.push_back(std::move(a));
      continue;
    }
    const auto decls = index_declarations(code);
    const bool has_decl = std::any_of(decls.begin(), decls.end(), [](const DeclSpan& d) {
      return d.category != DeclCategory::kPreamble;
    });
    if (!has_decl) {
      a.reason = "no declaration keywords";
      sk.attempts.push_back(std::move(a));
      continue;
    }
    a.source = compose_skeleton(tmpl.snippets, code);
    a.accepted = true;
    sk.source = a.source;
    sk.generation_attempt = attempt;
    sk.provenance = c.request_id;
    sk.attempts.push_back(std::move(a));
    return sk;
  }
  fail(ErrorCode::kGenerationExhausted, "no usable skeleton for " + problem.id + " after " +
                                            std::to_string(max_attempts) + " attempts");
}

}  // namespace leaninst
