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

#ifndef LEANINST_STATIC_FIXER_HPP_
#define LEANINST_STATIC_FIXER_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace leaninst {

struct RewriteRule {
  std::string id;
  std::string description;
};

// In application order.
const std::vector<RewriteRule>& rewrite_rules();

struct FixResult {
  std::string source;
  // Ids of rules that changed the text, in rule order.
  std::vector<std::string> applied;
};

// Runs the ordered rules repeatedly until a full pass changes nothing, so
// apply_rules(apply_rules(s).source).source == apply_rules(s).source.
// Only code regions are rewritten; comments and strings are left alone.
FixResult apply_rules(std::string_view src);

// Single rule by id, one pass. Unknown ids leave the text unchanged.
std::string apply_rule(std::string_view rule_id, std::string_view src);

}  // namespace leaninst

#endif  // LEANINST_STATIC_FIXER_HPP_
