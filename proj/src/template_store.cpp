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

#include "leaninst/template_store.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "fsutil.hpp"
#include "leaninst/error.hpp"
#include "leaninst/text.hpp"

namespace leaninst {

namespace fs = std::filesystem;
using json = nlohmann::json;

ClassRegistry ClassRegistry::defaults() {
  ClassRegistry r;
  r.add("GD", "gradient descent");
  r.add("PGM", "proximal gradient method");
  r.add("Nesterov", "Nesterov acceleration");
  r.add("BCD", "block coordinate descent");
  r.add("ADMM", "alternating direction method of multipliers");
  return r;
}

void ClassRegistry::add(std::string id, std::string description) {
  if (!contains(id)) ids_.push_back(id);
  descriptions_[std::move(id)] = std::move(description);
}

bool ClassRegistry::contains(std::string_view id) const {
  return descriptions_.find(id) != descriptions_.end();
}

std::string ClassRegistry::description(std::string_view id) const {
  auto it = descriptions_.find(id);
  return it == descriptions_.end() ? std::string() : it->second;
}

const char* role_name(Role r) {
  switch (r) {
    case Role::kD: return "D";
    case Role::kO: return "O";
    case Role::kC: return "C";
    case Role::kT: return "T";
  }
  return "D";
}

std::optional<Role> parse_role(std::string_view s) {
  if (s == "D") return Role::kD;
  if (s == "O") return Role::kO;
  if (s == "C") return Role::kC;
  if (s == "T") return Role::kT;
  return std::nullopt;
}

namespace {

bool starts_with_word(std::string_view s, std::string_view w) {
  return s.substr(0, w.size()) == w && (s.size() == w.size() || s[w.size()] == ' ');
}

}  // namespace

Snippets extract_snippets(std::string_view src, const std::vector<DeclSpan>& decls) {
  Snippets sn;
  const text::LineTable lines(src);
  const auto regions = text::classify_regions(src);
  for (const auto& span : decls) {
    if (span.category != DeclCategory::kPreamble) continue;
    for (int ln = span.start_line; ln <= span.end_line; ++ln) {
      const std::string_view l = text::rtrim(lines.line(ln));
      if (l.empty() || regions[lines.line_start(ln)] != text::Region::kCode) continue;
      const std::string line(l);
      if (starts_with_word(l, "import")) {
        sn.imports.push_back(line);
      } else if (starts_with_word(l, "open")) {
        sn.opens.push_back(line);
      } else if (!sn.section_header &&
                 (starts_with_word(l, "section") || starts_with_word(l, "noncomputable section"))) {
        sn.section_header = line;
        const std::string_view rest =
            text::trim(l.substr(l.find("section") + std::string_view("section").size()));
        if (!rest.empty()) sn.section_name = std::string(rest);
      } else if (starts_with_word(l, "local notation") || starts_with_word(l, "notation") ||
                 starts_with_word(l, "local infix") || starts_with_word(l, "local infixl") ||
                 starts_with_word(l, "local infixr") || starts_with_word(l, "local prefix") ||
                 starts_with_word(l, "local postfix")) {
        sn.local_notations.push_back(line);
      } else {
        continue;
      }
      sn.ordered.push_back(line);
    }
  }
  return sn;
}

std::optional<Role> Template::role_of(std::string_view name) const {
  for (const auto& [n, r] : roles) {
    if (n == name) return r;
  }
  return std::nullopt;
}

const DeclSpan* Template::find_decl(std::string_view name) const {
  for (const auto& d : decl_index) {
    if (d.category != DeclCategory::kPreamble && d.name == name) return &d;
  }
  return nullptr;
}

std::vector<std::string> Template::theorems() const {
  std::vector<std::string> out;
  for (const auto& [n, r] : roles) {
    if (r == Role::kT) out.push_back(n);
  }
  return out;
}

std::vector<std::pair<std::string, Role>> parse_roles(std::string_view sidecar) {
  std::vector<std::pair<std::string, Role>> out;
  std::set<std::string, std::less<>> seen;
  int ln = 0;
  for (std::string_view raw : text::split_lines(sidecar)) {
    ++ln;
    std::string_view l = raw;
    if (auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    l = text::trim(l);
    if (l.empty()) continue;
    const auto colon = l.rfind(':');
    if (colon == std::string_view::npos) {
      fail(ErrorCode::kRoleAnnotationInvalid,
           "roles line " + std::to_string(ln) + ": expected `name: D|O|C|T`");
    }
    const std::string name(text::trim(l.substr(0, colon)));
    const auto role = parse_role(text::trim(l.substr(colon + 1)));
    if (name.empty() || !role) {
      fail(ErrorCode::kRoleAnnotationInvalid,
           "roles line " + std::to_string(ln) + ": expected `name: D|O|C|T`");
    }
    if (!seen.insert(name).second) {
      fail(ErrorCode::kRoleAnnotationInvalid, "roles line " + std::to_string(ln) +
                                                  ": duplicate annotation for " + name);
    }
    out.emplace_back(name, *role);
  }
  return out;
}

std::string format_roles(const std::vector<std::pair<std::string, Role>>& roles) {
  std::string out;
  for (const auto& [n, r] : roles) out += n + ": " + role_name(r) + "\n";
  return out;
}

Template make_template(std::string class_id, std::string lean_source,
                       std::vector<std::pair<std::string, Role>> roles) {
  Template t;
  t.class_id = std::move(class_id);
  t.lean_source = std::move(lean_source);
  t.decl_index = index_declarations(t.lean_source);
  t.snippets = extract_snippets(t.lean_source, t.decl_index);
  t.roles = std::move(roles);
  if (t.snippets.imports.empty()) {
    fail(ErrorCode::kSchemaViolation, "template " + t.class_id + " has no import lines");
  }
  for (const auto& [n, r] : t.roles) {
    if (!t.find_decl(n)) {
      fail(ErrorCode::kRoleAnnotationInvalid,
           "template " + t.class_id + ": role for unknown declaration " + n);
    }
  }
  if (t.theorems().empty()) {
    fail(ErrorCode::kRoleAnnotationInvalid, "template " + t.class_id + " has no T-role declaration");
  }
  return t;
}

const ProblemSpec* Manifest::find(std::string_view id) const {
  for (const auto& p : problems) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

std::string problem_to_json_line(const ProblemSpec& p) {
  json j = json::object();
  j["id"] = p.id;
  j["class_id"] = p.class_id;
  j["title"] = p.title;
  j["description"] = p.description;
  j["objective_latex"] = p.objective_latex;
  j["template_ref"] = p.template_ref;
  j["example_ref"] = p.example_ref;
  return j.dump();
}

Manifest parse_manifest(std::string_view jsonl, const ClassRegistry& registry) {
  Manifest m;
  for (const auto& id : registry.ids()) m.class_counts[id] = 0;
  std::set<std::string, std::less<>> ids;
  int ln = 0;
  for (std::string_view raw : text::split_lines(jsonl)) {
    ++ln;
    if (text::is_blank(raw)) continue;
    const std::string where = "manifest line " + std::to_string(ln);
    json j;
    try {
      j = json::parse(raw);
    } catch (const json::exception& e) {
      fail(ErrorCode::kSchemaViolation, where + ": " + e.what());
    }
    if (!j.is_object()) fail(ErrorCode::kSchemaViolation, where + ": expected an object");
    ProblemSpec p;
    auto field = [&](const char* name, std::string& out) {
      auto it = j.find(name);
      if (it == j.end() || !it->is_string()) {
        fail(ErrorCode::kSchemaViolation, where + ": missing string field '" + name + "'");
      }
      out = it->get<std::string>();
    };
    field("id", p.id);
    field("class_id", p.class_id);
    field("title", p.title);
    field("description", p.description);
    field("objective_latex", p.objective_latex);
    field("template_ref", p.template_ref);
    field("example_ref", p.example_ref);
    if (p.id.empty()) fail(ErrorCode::kSchemaViolation, where + ": empty id");
    if (text::is_blank(p.description)) {
      fail(ErrorCode::kSchemaViolation, where + ": empty description");
    }
    if (!registry.contains(p.class_id)) {
      fail(ErrorCode::kUnknownClass, where + ": unknown class '" + p.class_id + "'");
    }
    if (!registry.contains(p.template_ref)) {
      fail(ErrorCode::kUnknownClass, where + ": unknown template '" + p.template_ref + "'");
    }
    if (!ids.insert(p.id).second) {
      fail(ErrorCode::kDuplicateId, where + ": duplicate id '" + p.id + "'");
    }
    ++m.class_counts[p.class_id];
    m.problems.push_back(std::move(p));
  }
  return m;
}

Manifest load_manifest(const fs::path& path, const ClassRegistry& registry) {
  if (!fs::exists(path)) fail(ErrorCode::kNotFound, "manifest not found: " + path.string());
  return parse_manifest(detail::read_file(path), registry);
}

TemplateStore::TemplateStore(fs::path templates_dir, fs::path examples_dir)
    : templates_dir_(std::move(templates_dir)), examples_dir_(std::move(examples_dir)) {}

std::shared_ptr<const Template> TemplateStore::load_template(std::string_view class_id) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = cache_.find(class_id); it != cache_.end()) return it->second;
  }
  const fs::path lean = templates_dir_ / (std::string(class_id) + ".lean");
  const fs::path roles = templates_dir_ / (std::string(class_id) + ".roles");
  if (!fs::exists(lean)) fail(ErrorCode::kMissingAsset, "missing template " + lean.string());
  if (!fs::exists(roles)) fail(ErrorCode::kMissingAsset, "missing roles sidecar " + roles.string());
  auto t = std::make_shared<const Template>(make_template(
      std::string(class_id), detail::read_file(lean), parse_roles(detail::read_file(roles))));
  std::lock_guard<std::mutex> lock(mu_);
  cache_.emplace(std::string(class_id), t);
  return t;
}

std::string TemplateStore::load_example(std::string_view example_ref) const {
  const fs::path p = examples_dir_ / (std::string(example_ref) + ".lean");
  if (!fs::exists(p)) fail(ErrorCode::kMissingAsset, "missing example " + p.string());
  return detail::read_file(p);
}

void TemplateStore::verify_manifest(const Manifest& manifest) const {
  for (const auto& p : manifest.problems) {
    load_template(p.template_ref);
    load_example(p.example_ref);
  }
}

void write_template(const fs::path& dir, const Template& tmpl) {
  detail::write_file_atomic(dir / (tmpl.class_id + ".lean"), tmpl.lean_source);
  detail::write_file_atomic(dir / (tmpl.class_id + ".roles"), format_roles(tmpl.roles));
}

}  // namespace leaninst
