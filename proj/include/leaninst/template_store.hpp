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

#ifndef LEANINST_TEMPLATE_STORE_HPP_
#define LEANINST_TEMPLATE_STORE_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leaninst/lean_driver.hpp"

namespace leaninst {

// Known algorithm classes. Starts with GD, PGM, Nesterov, BCD and ADMM.
class ClassRegistry {
 public:
  static ClassRegistry defaults();
  void add(std::string id, std::string description);
  bool contains(std::string_view id) const;
  const std::vector<std::string>& ids() const { return ids_; }
  std::string description(std::string_view id) const;

 private:
  std::vector<std::string> ids_;
  std::map<std::string, std::string, std::less<>> descriptions_;
};

// D: definitions, O: operations, C: conditions, T: theorems.
enum class Role { kD, kO, kC, kT };
const char* role_name(Role r);
std::optional<Role> parse_role(std::string_view s);

struct Snippets {
  std::vector<std::string> imports;
  std::vector<std::string> opens;
  std::optional<std::string> section_header;
  std::vector<std::string> local_notations;
  // All snippet lines in template order; this is what gets prepended.
  std::vector<std::string> ordered;
  // Section name opened by section_header, if any.
  std::optional<std::string> section_name;
};

// Preamble lines that are imports, opens, the first section header or
// notations, taken from the preamble spans of `src`.
Snippets extract_snippets(std::string_view src, const std::vector<DeclSpan>& decls);

struct Template {
  std::string class_id;
  std::string lean_source;
  Snippets snippets;
  std::vector<DeclSpan> decl_index;
  // Declaration name → role, kept in declaration order.
  std::vector<std::pair<std::string, Role>> roles;

  std::optional<Role> role_of(std::string_view name) const;
  const DeclSpan* find_decl(std::string_view name) const;
  // Names of T-role declarations.
  std::vector<std::string> theorems() const;
};

// Validates roles against the declaration index: every role names a
// declaration and at least one T exists.
Template make_template(std::string class_id, std::string lean_source,
                       std::vector<std::pair<std::string, Role>> roles);

// `name: D|O|C|T` per line; `#` starts a comment.
std::vector<std::pair<std::string, Role>> parse_roles(std::string_view sidecar);
std::string format_roles(const std::vector<std::pair<std::string, Role>>& roles);

struct ProblemSpec {
  std::string id;
  std::string class_id;
  std::string title;
  std::string description;
  std::string objective_latex;
  std::string template_ref;
  std::string example_ref;
};

struct Manifest {
  std::vector<ProblemSpec> problems;
  std::map<std::string, int> class_counts;

  const ProblemSpec* find(std::string_view id) const;
};

std::string problem_to_json_line(const ProblemSpec& p);
// Empty or whitespace-only files give an empty manifest.
Manifest parse_manifest(std::string_view jsonl, const ClassRegistry& registry);
Manifest load_manifest(const std::filesystem::path& path, const ClassRegistry& registry);

// Templates under `<dir>/<class_id>.lean` with a `<class_id>.roles` sidecar;
// worked examples under `<examples_dir>/<example_ref>.lean`.
class TemplateStore {
 public:
  TemplateStore(std::filesystem::path templates_dir, std::filesystem::path examples_dir);

  std::shared_ptr<const Template> load_template(std::string_view class_id) const;
  std::string load_example(std::string_view example_ref) const;
  // Loads every template and example the manifest references.
  void verify_manifest(const Manifest& manifest) const;

  const std::filesystem::path& templates_dir() const { return templates_dir_; }

 private:
  std::filesystem::path templates_dir_;
  std::filesystem::path examples_dir_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::shared_ptr<const Template>, std::less<>> cache_;
};

void write_template(const std::filesystem::path& dir, const Template& tmpl);

}  // namespace leaninst

#endif  // LEANINST_TEMPLATE_STORE_HPP_
