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

#include "leaninst/static_fixer.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "leaninst/text.hpp"

namespace leaninst {

using text::Region;

namespace {

struct Doc {
  std::vector<std::string> lines;
  bool trailing_newline = false;

  static Doc from(std::string_view src) {
    Doc d;
    for (auto l : text::split_lines(src)) d.lines.emplace_back(l);
    d.trailing_newline = !src.empty() && src.back() == '\n';
    return d;
  }
  std::string str() const { return text::join_lines(lines, trailing_newline && !lines.empty()); }
};

// Region at each line's first non-blank byte; blank lines report kCode.
std::vector<Region> line_lead_regions(std::string_view src) {
  std::vector<Region> out;
  const auto regions = text::classify_regions(src);
  std::size_t b = 0;
  for (auto l : text::split_lines(src)) {
    const std::size_t ind = text::indent_of(l);
    out.push_back(ind < l.size() ? regions[b + ind] : Region::kCode);
    b += l.size() + 1;
  }
  return out;
}

bool starts_with_word(std::string_view s, std::string_view w) {
  return s.substr(0, w.size()) == w && (s.size() == w.size() || s[w.size()] == ' ' ||
                                        s[w.size()] == '\t');
}

bool is_top_code(const std::string& line, Region lead) {
  return !line.empty() && line[0] != ' ' && line[0] != '\t' && lead == Region::kCode;
}

// `section X`, `noncomputable section X` or bare `section`; yields the name.
bool section_header(std::string_view l, std::string& name) {
  l = text::rtrim(l);
  std::string_view rest;
  if (starts_with_word(l, "section")) {
    rest = l.substr(7);
  } else if (starts_with_word(l, "noncomputable section")) {
    rest = l.substr(21);
  } else {
    return false;
  }
  name = std::string(text::trim(rest));
  return name.find(' ') == std::string::npos;
}

std::string strip_fences(std::string_view src) {
  Doc d = Doc::from(src);
  const auto lead = line_lead_regions(src);
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < d.lines.size(); ++i) {
    const auto t = text::trim(d.lines[i]);
    if (lead[i] == Region::kCode && t.substr(0, 3) == "```") continue;
    kept.push_back(std::move(d.lines[i]));
  }
  d.lines = std::move(kept);
  return d.str();
}

std::string dedup_imports(std::string_view src) {
  Doc d = Doc::from(src);
  const auto lead = line_lead_regions(src);
  std::set<std::string> seen;
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < d.lines.size(); ++i) {
    const std::string& l = d.lines[i];
    if (is_top_code(l, lead[i]) && (starts_with_word(l, "import") || starts_with_word(l, "open"))) {
      if (!seen.insert(std::string(text::rtrim(l))).second) continue;
    }
    kept.push_back(l);
  }
  d.lines = std::move(kept);
  return d.str();
}

std::string remove_empty_sections(std::string_view src) {
  Doc d = Doc::from(src);
  const auto lead = line_lead_regions(src);
  std::vector<bool> drop(d.lines.size(), false);
  for (std::size_t i = 0; i < d.lines.size(); ++i) {
    std::string name;
    if (drop[i] || !is_top_code(d.lines[i], lead[i]) || !section_header(d.lines[i], name)) continue;
    std::size_t j = i + 1;
    while (j < d.lines.size() && text::is_blank(d.lines[j])) ++j;
    if (j >= d.lines.size() || lead[j] != Region::kCode) continue;
    const std::string want = name.empty() ? "end" : "end " + name;
    if (text::rtrim(d.lines[j]) != want) continue;
    for (std::size_t k = i; k <= j; ++k) drop[k] = true;
  }
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < d.lines.size(); ++i) {
    if (!drop[i]) kept.push_back(std::move(d.lines[i]));
  }
  d.lines = std::move(kept);
  return d.str();
}

std::string remove_debug_commands(std::string_view src) {
  Doc d = Doc::from(src);
  const auto lead = line_lead_regions(src);
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < d.lines.size(); ++i) {
    const std::string& l = d.lines[i];
    if (is_top_code(l, lead[i]) && (starts_with_word(l, "#check") || starts_with_word(l, "#eval") ||
                                    starts_with_word(l, "#print"))) {
      while (i + 1 < d.lines.size() && !text::is_blank(d.lines[i + 1]) &&
             text::indent_of(d.lines[i + 1]) > 0) {
        ++i;
      }
      continue;
    }
    kept.push_back(l);
  }
  d.lines = std::move(kept);
  return d.str();
}

struct Group {
  char32_t open = 0;
  std::string text;          // verbatim, brackets included
  std::vector<std::string> names;
  std::string type;          // after the colon, trimmed; empty when absent
  std::size_t end_offset = 0;  // in the line
};

const std::string kLAngle2 = "\xE2\xA6\x83";  // ⦃
const std::string kRAngle2 = "\xE2\xA6\x84";  // ⦄

// Parses the binder groups of a one-line `variable` command.
bool parse_groups(std::string_view line, std::size_t pos, std::vector<Group>& out) {
  while (true) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) return !out.empty();
    Group g;
    std::size_t open_len = 1;
    if (line[pos] == '(' || line[pos] == '{' || line[pos] == '[') {
      g.open = static_cast<unsigned char>(line[pos]);
    } else if (line.substr(pos, 3) == kLAngle2) {
      g.open = 0x2983;
      open_len = 3;
    } else {
      return false;
    }
    int depth = 0;
    std::size_t i = pos;
    std::size_t close = std::string_view::npos;
    while (i < line.size()) {
      if (line.substr(i, 3) == kLAngle2) {
        ++depth;
        i += 3;
        continue;
      }
      if (line.substr(i, 3) == kRAngle2) {
        if (--depth == 0) {
          close = i + 3;
          break;
        }
        i += 3;
        continue;
      }
      const char c = line[i];
      if (c == '(' || c == '{' || c == '[') ++depth;
      if (c == ')' || c == '}' || c == ']') {
        if (--depth == 0) {
          close = i + 1;
          break;
        }
      }
      ++i;
    }
    if (close == std::string_view::npos) return false;
    g.text = std::string(line.substr(pos, close - pos));
    g.end_offset = close;
    const std::size_t close_len = g.open == 0x2983 ? 3 : 1;
    const std::string_view inner = line.substr(pos + open_len, close - pos - open_len - close_len);
    if (g.open != '[') {
      // Split names from type at the first depth-0 colon that is not `:=`.
      int dd = 0;
      std::size_t colon = std::string_view::npos;
      for (std::size_t k = 0; k < inner.size(); ++k) {
        const char c = inner[k];
        if (c == '(' || c == '{' || c == '[') ++dd;
        if (c == ')' || c == '}' || c == ']') --dd;
        if (dd == 0 && c == ':' && (k + 1 >= inner.size() || inner[k + 1] != '=')) {
          colon = k;
          break;
        }
      }
      const std::string_view names = colon == std::string_view::npos ? inner : inner.substr(0, colon);
      if (colon != std::string_view::npos) g.type = std::string(text::trim(inner.substr(colon + 1)));
      std::size_t k = 0;
      while (k < names.size()) {
        while (k < names.size() && (names[k] == ' ' || names[k] == '\t')) ++k;
        std::size_t e = k;
        while (e < names.size() && names[e] != ' ' && names[e] != '\t') ++e;
        if (e > k) g.names.emplace_back(names.substr(k, e - k));
        k = e;
      }
      if (g.names.empty()) return false;
      for (const auto& n : g.names) {
        std::size_t p = 0;
        if (!text::is_ident_start(text::decode_utf8(n, p))) return false;
      }
    }
    out.push_back(std::move(g));
    pos = close;
  }
}

std::string drop_unused_variables_once(std::string_view src) {
  Doc d = Doc::from(src);
  bool changed_any = false;
  for (std::size_t i = 0; i < d.lines.size(); ++i) {
    const std::string current = d.str();
    const auto lead = line_lead_regions(current);
    const std::string& l = d.lines[i];
    if (!is_top_code(l, lead[i]) || !starts_with_word(l, "variable")) continue;
    if (i + 1 < d.lines.size() && !text::is_blank(d.lines[i + 1]) &&
        text::indent_of(d.lines[i + 1]) > 0) {
      continue;  // multi-line command; leave it alone
    }
    if (text::classify_regions(l).back() != Region::kCode) continue;  // trailing comment
    std::vector<Group> groups;
    if (!parse_groups(l, 8, groups)) continue;

    std::size_t line_off = 0;
    for (std::size_t k = 0; k < i; ++k) line_off += d.lines[k].size() + 1;
    const auto tokens = text::identifier_tokens(current);
    auto used_after = [&](const std::string& name, std::size_t after) {
      return std::any_of(tokens.begin(), tokens.end(), [&](const text::Token& t) {
        if (t.offset < after) return false;
        return t.text == name ||
               (t.text.size() > name.size() && t.text.compare(0, name.size(), name) == 0 &&
                t.text[name.size()] == '.');
      });
    };

    std::vector<std::string> rebuilt;
    bool changed = false;
    for (const auto& g : groups) {
      if (g.open == '[') {
        rebuilt.push_back(g.text);
        continue;
      }
      std::vector<std::string> keep;
      for (const auto& n : g.names) {
        if (n == "_" || used_after(n, line_off + g.end_offset)) keep.push_back(n);
      }
      if (keep.size() == g.names.size()) {
        rebuilt.push_back(g.text);
        continue;
      }
      changed = true;
      if (keep.empty()) continue;
      std::string open, close;
      switch (g.open) {
        case '(': open = "("; close = ")"; break;
        case '{': open = "{"; close = "}"; break;
        default: open = kLAngle2; close = kRAngle2; break;
      }
      std::string names;
      for (const auto& n : keep) names += (names.empty() ? "" : " ") + n;
      rebuilt.push_back(open + names + (g.type.empty() ? "" : " : " + g.type) + close);
    }
    if (!changed) continue;
    changed_any = true;
    if (rebuilt.empty()) {
      d.lines.erase(d.lines.begin() + static_cast<std::ptrdiff_t>(i));
      --i;
    } else {
      std::string line = "variable";
      for (const auto& g : rebuilt) line += " " + g;
      d.lines[i] = line;
    }
  }
  return changed_any ? d.str() : std::string(src);
}

// Dropping one binder can orphan another that only it referenced, so repeat
// until nothing changes.
std::string drop_unused_variables(std::string_view src) {
  std::string cur(src);
  for (;;) {
    std::string next = drop_unused_variables_once(cur);
    if (next == cur) return cur;
    cur = std::move(next);
  }
}

bool ascii_ident(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

std::string normalize_unicode(std::string_view src) {
  const auto regions = text::classify_regions(src);
  std::string out;
  out.reserve(src.size());
  std::size_t i = 0;
  auto escape_at = [&](std::string_view esc) {
    if (src.substr(i, esc.size()) != esc) return false;
    const std::size_t e = i + esc.size();
    return e >= src.size() || !ascii_ident(src[e]);
  };
  while (i < src.size()) {
    if (regions[i] == Region::kCode) {
      if (src[i] == '\\') {
        if (escape_at("\\R")) {
          out += "\xE2\x84\x9D";  // ℝ
          i += 2;
          continue;
        }
        if (escape_at("\\to")) {
          out += "\xE2\x86\x92";  // →
          i += 3;
          continue;
        }
        if (escape_at("\\forall")) {
          out += "\xE2\x88\x80";  // ∀
          i += 7;
          continue;
        }
      }
      if (src.substr(i, 2) == "->" && !(i > 0 && (src[i - 1] == '<' || src[i - 1] == '-')) &&
          !(i + 2 < src.size() && src[i + 2] == '>')) {
        out += "\xE2\x86\x92";
        i += 2;
        continue;
      }
    }
    out += src[i++];
  }
  return out;
}

std::string close_section(std::string_view src) {
  Doc d = Doc::from(src);
  const auto lead = line_lead_regions(src);
  struct Scope {
    bool is_section;
    std::string name;
  };
  std::vector<Scope> stack;
  for (std::size_t i = 0; i < d.lines.size(); ++i) {
    const std::string& l = d.lines[i];
    if (!is_top_code(l, lead[i])) continue;
    std::string name;
    if (section_header(l, name)) {
      stack.push_back({true, name});
    } else if (starts_with_word(l, "namespace")) {
      stack.push_back({false, std::string(text::trim(std::string_view(l).substr(9)))});
    } else if (starts_with_word(l, "mutual")) {
      stack.push_back({false, ""});
    } else if (starts_with_word(l, "end") && !stack.empty()) {
      stack.pop_back();
    }
  }
  if (std::none_of(stack.begin(), stack.end(), [](const Scope& s) { return s.is_section; })) {
    return std::string(src);
  }
  while (!d.lines.empty() && text::is_blank(d.lines.back())) d.lines.pop_back();
  d.lines.emplace_back();
  for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
    d.lines.push_back(it->name.empty() ? "end" : "end " + it->name);
  }
  d.trailing_newline = true;
  return d.str();
}

struct RuleImpl {
  RewriteRule rule;
  std::function<std::string(std::string_view)> fn;
};

const std::vector<RuleImpl>& rule_impls() {
  static const std::vector<RuleImpl> impls = {
      {{"strip_fences", "remove residual markdown code fences"}, strip_fences},
      {{"dedup_imports", "drop repeated import/open lines"}, dedup_imports},
      {{"remove_empty_sections", "remove `section X` / `end X` pairs with nothing between"},
       remove_empty_sections},
      {{"remove_debug_commands", "remove #check, #eval and #print commands"},
       remove_debug_commands},
      {{"drop_unused_variables",
        "drop file-scope `variable` binders whose names never occur later in the file"},
       drop_unused_variables},
      {{"normalize_unicode", "rewrite \\R, \\to, \\forall and -> to their Unicode forms"},
       normalize_unicode},
      {{"close_section", "append `end X` for sections left open at end of file"}, close_section},
  };
  return impls;
}

}  // namespace

const std::vector<RewriteRule>& rewrite_rules() {
  static const std::vector<RewriteRule> rules = [] {
    std::vector<RewriteRule> r;
    for (const auto& impl : rule_impls()) r.push_back(impl.rule);
    return r;
  }();
  return rules;
}

std::string apply_rule(std::string_view rule_id, std::string_view src) {
  for (const auto& impl : rule_impls()) {
    if (impl.rule.id == rule_id) return impl.fn(src);
  }
  return std::string(src);
}

FixResult apply_rules(std::string_view src) {
  const auto& impls = rule_impls();
  std::vector<bool> fired(impls.size(), false);
  std::string cur(src);
  constexpr int kMaxPasses = 16;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool changed = false;
    for (std::size_t r = 0; r < impls.size(); ++r) {
      std::string next = impls[r].fn(cur);
      if (next != cur) {
        fired[r] = true;
        changed = true;
        cur = std::move(next);
      }
    }
    if (!changed) break;
  }
  FixResult res;
  res.source = std::move(cur);
  for (std::size_t r = 0; r < impls.size(); ++r) {
    if (fired[r]) res.applied.push_back(impls[r].rule.id);
  }
  return res;
}

}  // namespace leaninst
