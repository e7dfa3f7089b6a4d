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

#include "leaninst/lean_driver.hpp"

#include <algorithm>
#include <fstream>
#include <unistd.h>

#include "leaninst/digest.hpp"
#include "leaninst/error.hpp"
#include "leaninst/text.hpp"
#include "fsutil.hpp"
#include "subprocess.hpp"

namespace leaninst {

namespace fs = std::filesystem;
using text::Region;

namespace {

constexpr const char* kKindNames[] = {
    "syntax_error",    "type_mismatch",   "failed_to_synthesize", "invalid_field",
    "unknown_identifier", "unexpected_token", "unknown_constant", "unclassified",
    "missing_definition", "timeout",         "no_goals",          "apply_failed",
    "incomplete_proof",
};

bool is_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

struct Header {
  std::string file;
  int line = 0;
  int col = 0;
  Severity severity = Severity::kError;
  std::string rest;
};

// Finds `:<line>:<col>: <severity>:` scanning left to right so that file
// names containing colons still parse.
std::optional<Header> parse_header(std::string_view l) {
  std::size_t search = 0;
  while (true) {
    const std::size_t c1 = l.find(':', search);
    if (c1 == std::string_view::npos || c1 == 0) return std::nullopt;
    search = c1 + 1;
    const std::size_t c2 = l.find(':', c1 + 1);
    if (c2 == std::string_view::npos) return std::nullopt;
    const std::size_t c3 = l.find(':', c2 + 1);
    if (c3 == std::string_view::npos) return std::nullopt;
    const auto line_s = l.substr(c1 + 1, c2 - c1 - 1);
    const auto col_s = l.substr(c2 + 1, c3 - c2 - 1);
    if (!is_digits(line_s) || !is_digits(col_s)) continue;
    std::string_view tail = l.substr(c3 + 1);
    if (tail.empty() || tail.front() != ' ') continue;
    tail.remove_prefix(1);
    Severity sev;
    std::size_t sev_len;
    if (tail.substr(0, 6) == "error:") {
      sev = Severity::kError;
      sev_len = 6;
    } else if (tail.substr(0, 8) == "warning:") {
      sev = Severity::kWarning;
      sev_len = 8;
    } else if (tail.substr(0, 5) == "info:") {
      sev = Severity::kWarning;
      sev_len = 5;
    } else {
      continue;
    }
    Header h;
    h.file = std::string(l.substr(0, c1));
    h.line = std::stoi(std::string(line_s));
    h.col = std::stoi(std::string(col_s));
    h.severity = sev;
    std::string_view rest = tail.substr(sev_len);
    if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    h.rest = std::string(rest);
    return h;
  }
}

void finish_message(Diagnostic& d) {
  while (!d.message.empty() && (d.message.back() == '\n' || d.message.back() == ' ' ||
                                d.message.back() == '\r')) {
    d.message.pop_back();
  }
  if (d.message.empty()) d.message = "(empty message)";
  if (d.line < 1) d.line = 1;
  d.kind = normalize_error(d.message);
}

}  // namespace

const char* error_kind_name(ErrorKind kind) { return kKindNames[static_cast<int>(kind)]; }

std::optional<ErrorKind> parse_error_kind(std::string_view name) {
  for (ErrorKind k : kAllErrorKinds) {
    if (name == error_kind_name(k)) return k;
  }
  return std::nullopt;
}

const char* severity_name(Severity s) { return s == Severity::kError ? "error" : "warning"; }

const char* decl_category_name(DeclCategory c) {
  switch (c) {
    case DeclCategory::kDefinition: return "definition";
    case DeclCategory::kTheorem: return "theorem";
    case DeclCategory::kInstance: return "instance";
    case DeclCategory::kPreamble: return "preamble";
  }
  return "preamble";
}

std::optional<DeclCategory> parse_decl_category(std::string_view name) {
  for (auto c : {DeclCategory::kDefinition, DeclCategory::kTheorem, DeclCategory::kInstance,
                 DeclCategory::kPreamble}) {
    if (name == decl_category_name(c)) return c;
  }
  return std::nullopt;
}

ParsedDiagnostics parse_diagnostics_report(std::string_view raw) {
  ParsedDiagnostics out;
  bool open = false;
  for (std::string_view l : text::split_lines(raw)) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    if (auto h = parse_header(l)) {
      if (open) finish_message(out.diagnostics.back());
      Diagnostic d;
      d.file = std::move(h->file);
      d.line = h->line;
      d.col = h->col;
      d.severity = h->severity;
      d.message = std::move(h->rest);
      out.diagnostics.push_back(std::move(d));
      open = true;
    } else if (open) {
      auto& msg = out.diagnostics.back().message;
      if (!msg.empty()) msg += '\n';
      msg += l;
    } else {
      ++out.ignored_lines;
    }
  }
  if (open) finish_message(out.diagnostics.back());
  return out;
}

std::vector<Diagnostic> parse_diagnostics(std::string_view raw) {
  return parse_diagnostics_report(raw).diagnostics;
}

const std::vector<NormalizationRule>& normalization_table() {
  using M = NormalizationRule::Match;
  static const std::vector<NormalizationRule> table = {
      {ErrorKind::kTimeout, M::kContains, "deterministic) timeout"},
      {ErrorKind::kTimeout, M::kContains, "maximum recursion depth"},
      {ErrorKind::kTimeout, M::kContains, "timeout"},
      {ErrorKind::kNoGoals, M::kContains, "no goals"},
      {ErrorKind::kApplyFailed, M::kContains, "tactic 'apply' failed"},
      {ErrorKind::kIncompleteProof, M::kContains, "unsolved goals"},
      {ErrorKind::kUnexpectedToken, M::kContains, "unexpected token"},
      {ErrorKind::kSyntaxError, M::kPrefix, "expected "},
      {ErrorKind::kSyntaxError, M::kContains, "unexpected end of input"},
      {ErrorKind::kSyntaxError, M::kContains, "unexpected identifier"},
      {ErrorKind::kSyntaxError, M::kContains, "unterminated"},
      {ErrorKind::kSyntaxError, M::kContains, "invalid 'end'"},
      {ErrorKind::kSyntaxError, M::kContains, "parse error"},
      {ErrorKind::kSyntaxError, M::kContains, "syntax error"},
      {ErrorKind::kTypeMismatch, M::kContains, "don't know how to synthesize"},
      {ErrorKind::kFailedToSynthesize, M::kContains, "failed to synthesize"},
      {ErrorKind::kTypeMismatch, M::kContains, "type mismatch"},
      {ErrorKind::kTypeMismatch, M::kContains, "function expected"},
      {ErrorKind::kInvalidField, M::kContains, "invalid field"},
      {ErrorKind::kInvalidField, M::kContains, "invalid projection"},
      {ErrorKind::kInvalidField, M::kContains, "invalid dotted identifier"},
      {ErrorKind::kUnknownConstant, M::kContains, "unknown constant"},
      {ErrorKind::kUnknownIdentifier, M::kContains, "unknown identifier"},
      {ErrorKind::kUnknownIdentifier, M::kContains, "unknown namespace"},
      {ErrorKind::kMissingDefinition, M::kContains, "fields missing"},
      {ErrorKind::kMissingDefinition, M::kContains, "unknown declaration"},
      {ErrorKind::kMissingDefinition, M::kContains, "missing definition"},
  };
  return table;
}

ErrorKind normalize_error(std::string_view message) {
  const std::string lower = text::to_lower_ascii(message);
  const std::string_view s = text::trim(lower);
  for (const auto& rule : normalization_table()) {
    const bool hit = rule.match == NormalizationRule::Match::kPrefix
                         ? s.substr(0, rule.needle.size()) == rule.needle
                         : s.find(rule.needle) != std::string_view::npos;
    if (hit) return rule.kind;
  }
  return ErrorKind::kUnclassified;
}

std::vector<SorrySite> scan_sorries(std::string_view src) {
  std::vector<SorrySite> out;
  for (const auto& tok : text::identifier_tokens(src)) {
    if (tok.text == "sorry") out.push_back({tok.line, tok.col});
  }
  return out;
}

namespace {

// Byte length of the bracket opener/closer at `i`, with its depth delta.
int bracket_delta(std::string_view s, std::size_t i, std::size_t& len) {
  len = 1;
  switch (s[i]) {
    case '(': case '[': case '{': return 1;
    case ')': case ']': case '}': return -1;
    default: break;
  }
  if (s.substr(i, 3) == "\xE2\x9F\xA8") {  // ⟨
    len = 3;
    return 1;
  }
  if (s.substr(i, 3) == "\xE2\x9F\xA9") {  // ⟩
    len = 3;
    return -1;
  }
  return 0;
}

// Reads an identifier starting at `i`; returns its end (== i if none).
std::size_t ident_end(std::string_view s, std::size_t i) {
  std::size_t p = i;
  if (p >= s.size()) return i;
  const char32_t c = text::decode_utf8(s, p);
  if (!text::is_ident_start(c)) return i;
  std::size_t end = p;
  while (end < s.size()) {
    std::size_t q = end;
    const char32_t d = text::decode_utf8(s, q);
    if (text::is_ident_rest(d)) {
      end = q;
    } else if (d == '.' && q < s.size()) {
      std::size_t r = q;
      if (!text::is_ident_start(text::decode_utf8(s, r))) break;
      end = q;
    } else {
      break;
    }
  }
  return end;
}

bool ident_boundary_before(std::string_view s, std::size_t i) {
  if (i == 0) return true;
  // Walk back to the start of the previous code point.
  std::size_t b = i - 1;
  while (b > 0 && (static_cast<unsigned char>(s[b]) & 0xC0) == 0x80) --b;
  std::size_t p = b;
  const char32_t c = text::decode_utf8(s, p);
  return !text::is_ident_rest(c) && c != '.';
}

}  // namespace

std::optional<BodyDelimiter> find_body_delimiter(std::string_view decl_text) {
  const auto regions = text::classify_regions(decl_text);
  int depth = 0;
  std::size_t i = 0;
  const std::size_t n = decl_text.size();
  while (i < n) {
    if (regions[i] != Region::kCode) {
      ++i;
      continue;
    }
    std::size_t len = 1;
    const int delta = bracket_delta(decl_text, i, len);
    if (delta != 0) {
      depth = std::max(0, depth + delta);
      i += len;
      continue;
    }
    if (depth == 0 && decl_text.substr(i, 2) == ":=") {
      BodyDelimiter d{BodyDelimiter::Kind::kAssign, i, i + 2};
      std::size_t j = i + 2;
      while (j < n && (decl_text[j] == ' ' || decl_text[j] == '\t' || decl_text[j] == '\n' ||
                       decl_text[j] == '\r')) {
        ++j;
      }
      if (j < n && regions[j] == Region::kCode && ident_end(decl_text, j) == j + 2 &&
          decl_text.substr(j, 2) == "by") {
        d.kind = BodyDelimiter::Kind::kAssignBy;
        d.end = j + 2;
      }
      return d;
    }
    if (ident_boundary_before(decl_text, i)) {
      const std::size_t e = ident_end(decl_text, i);
      if (e > i) {
        if (depth == 0 && decl_text.substr(i, e - i) == "where") {
          return BodyDelimiter{BodyDelimiter::Kind::kWhere, i, e};
        }
        i = e;
        continue;
      }
    }
    ++i;
  }
  return std::nullopt;
}

namespace {

struct Head {
  DeclCategory category = DeclCategory::kPreamble;
  std::string keyword;
  std::size_t after = 0;  // offset in the line just past the keyword
  bool attribute_only = false;
};

const char* const kModifiers[] = {"private", "protected", "noncomputable", "partial",
                                  "unsafe",  "nonrec",    "scoped",        "local"};
const char* const kDefinitionKw[] = {"def", "abbrev", "class", "structure", "inductive",
                                     "opaque", "axiom"};
const char* const kTheoremKw[] = {"theorem", "lemma", "example"};
const char* const kPreambleKw[] = {
    "import",  "open",     "variable", "variables",  "universe", "universes", "section",
    "namespace", "end",    "notation", "infix",      "infixl",   "infixr",    "prefix",
    "postfix", "set_option", "attribute", "export",  "macro",    "macro_rules", "syntax",
    "elab",    "mutual",   "deriving", "initialize", "builtin_initialize"};

template <std::size_t N>
bool in(const char* const (&arr)[N], std::string_view w) {
  for (const char* a : arr) {
    if (w == a) return true;
  }
  return false;
}

std::size_t skip_spaces(std::string_view l, std::size_t i) {
  while (i < l.size() && (l[i] == ' ' || l[i] == '\t')) ++i;
  return i;
}

// `line` must start at column zero in code.
std::optional<Head> classify_head(std::string_view line) {
  if (line.empty() || line[0] == ' ' || line[0] == '\t') return std::nullopt;
  std::size_t i = 0;
  bool saw_attribute = false;
  while (line.substr(i, 2) == "@[") {
    int depth = 0;
    std::size_t j = i + 1;
    for (; j < line.size(); ++j) {
      if (line[j] == '[') ++depth;
      if (line[j] == ']' && --depth == 0) break;
    }
    if (j >= line.size()) return std::nullopt;
    saw_attribute = true;
    i = skip_spaces(line, j + 1);
  }
  if (saw_attribute && text::trim(line.substr(i)).empty()) {
    Head h;
    h.attribute_only = true;
    return h;
  }
  if (i < line.size() && line[i] == '#') {
    std::size_t e = ident_end(line, i + 1);
    if (e == i + 1) return std::nullopt;
    Head h;
    h.keyword = std::string(line.substr(i, e - i));
    h.after = e;
    return h;
  }
  while (true) {
    const std::size_t e = ident_end(line, i);
    if (e == i) return std::nullopt;
    const std::string_view w = line.substr(i, e - i);
    if (in(kModifiers, w)) {
      i = skip_spaces(line, e);
      continue;
    }
    Head h;
    h.keyword = std::string(w);
    h.after = e;
    if (in(kDefinitionKw, w)) {
      h.category = DeclCategory::kDefinition;
    } else if (in(kTheoremKw, w)) {
      h.category = DeclCategory::kTheorem;
    } else if (w == "instance") {
      h.category = DeclCategory::kInstance;
    } else if (in(kPreambleKw, w)) {
      h.category = DeclCategory::kPreamble;
    } else {
      return std::nullopt;
    }
    return h;
  }
}

}  // namespace

std::vector<DeclSpan> index_declarations(std::string_view src) {
  std::vector<DeclSpan> spans;
  if (src.empty()) return spans;
  const text::LineTable lines(src);
  const auto regions = text::classify_regions(src);
  const int nlines = lines.line_count();

  struct Open {
    int start;
    int keyword_line;
    Head head;
  };
  std::vector<Open> opens;
  int pending_attr = 0;   // line of a dangling attribute-only line
  int doc_start = 0;      // first line of a column-0 doc comment
  int doc_end = 0;        // its last line

  for (int ln = 1; ln <= nlines; ++ln) {
    const std::size_t off = lines.line_start(ln);
    const std::string_view l = lines.line(ln);
    if (l.empty()) continue;
    if (regions[off] == Region::kBlockComment && l.substr(0, 3) == "/--" &&
        (off == 0 || regions[off - 1] != Region::kBlockComment)) {
      std::size_t e = off;
      while (e < src.size() && regions[e] == Region::kBlockComment) ++e;
      doc_start = ln;
      doc_end = lines.line_of_offset(e == 0 ? 0 : e - 1);
      continue;
    }
    if (regions[off] != Region::kCode) continue;
    auto head = classify_head(l);
    if (!head) continue;
    if (head->attribute_only) {
      pending_attr = ln;
      continue;
    }
    int start = ln;
    if (pending_attr && pending_attr == ln - 1) start = pending_attr;
    if (doc_start && doc_end == start - 1) start = doc_start;
    pending_attr = 0;
    opens.push_back({start, ln, std::move(*head)});
  }

  const auto sorries = scan_sorries(src);
  auto push = [&](DeclSpan s) {
    if (s.category == DeclCategory::kPreamble && !spans.empty() &&
        spans.back().category == DeclCategory::kPreamble) {
      spans.back().end_line = s.end_line;
      return;
    }
    spans.push_back(std::move(s));
  };

  if (opens.empty() || opens.front().start > 1) {
    DeclSpan pre;
    pre.start_line = 1;
    pre.end_line = opens.empty() ? nlines : opens.front().start - 1;
    push(std::move(pre));
  }
  for (std::size_t k = 0; k < opens.size(); ++k) {
    const Open& o = opens[k];
    DeclSpan s;
    s.category = o.head.category;
    s.start_line = o.start;
    s.end_line = k + 1 < opens.size() ? opens[k + 1].start - 1 : nlines;
    if (s.category != DeclCategory::kPreamble) {
      // Name: the identifier after the keyword, possibly on a later line.
      std::size_t p = lines.line_start(o.keyword_line) + o.head.after;
      const std::size_t span_end = lines.line_end_inclusive(s.end_line);
      while (p < span_end && (src[p] == ' ' || src[p] == '\t' || src[p] == '\n' ||
                              src[p] == '\r' || regions[p] != Region::kCode)) {
        ++p;
      }
      const std::size_t e = ident_end(src.substr(0, span_end), p);
      std::string name = e > p ? std::string(src.substr(p, e - p)) : std::string();
      if (o.head.keyword == "example" || name.empty() || name == "where" || name == "extends") {
        name = o.head.keyword + "@" + std::to_string(o.keyword_line);
      }
      s.name = std::move(name);

      const std::size_t head_off = lines.line_start(o.keyword_line);
      const std::string_view body = src.substr(head_off, span_end - head_off);
      if (auto d = find_body_delimiter(body)) {
        s.body_line = lines.line_of_offset(head_off + d->offset);
        if (s.category == DeclCategory::kTheorem) {
          s.body_is_proof = true;
        } else if (s.category == DeclCategory::kInstance) {
          // Instance fields may be propositions, so any nonempty body counts.
          const std::string_view rest = body.substr(d->end);
          const auto rest_regions = text::classify_regions(rest);
          bool nonempty = false;
          for (std::size_t i = 0; i < rest.size() && !nonempty; ++i) {
            nonempty = rest_regions[i] == Region::kCode && rest[i] != ' ' && rest[i] != '\t' &&
                       rest[i] != '\n' && rest[i] != '\r';
          }
          s.body_is_proof = nonempty;
        }
      }
    }
    push(std::move(s));
  }

  for (auto& s : spans) {
    s.has_sorry = std::any_of(sorries.begin(), sorries.end(), [&](const SorrySite& site) {
      return site.line >= s.start_line && site.line <= s.end_line;
    });
  }
  return spans;
}

std::string_view span_text(std::string_view src, const DeclSpan& span) {
  const text::LineTable lines(src);
  if (lines.line_count() == 0) return {};
  const int first = std::clamp(span.start_line, 1, lines.line_count());
  const int last = std::clamp(span.end_line, first, lines.line_count());
  const std::size_t b = lines.line_start(first);
  const std::size_t e = lines.line_end_inclusive(last);
  return src.substr(b, e - b);
}

void attribute_diagnostics(std::vector<Diagnostic>& diags, const std::vector<DeclSpan>& spans) {
  for (auto& d : diags) {
    d.decl.reset();
    if (spans.empty()) continue;
    const DeclSpan* owner = &spans.back();
    if (d.line <= spans.back().end_line) {
      auto it = std::lower_bound(spans.begin(), spans.end(), d.line,
                                 [](const DeclSpan& s, int line) { return s.end_line < line; });
      owner = it == spans.end() ? &spans.back() : &*it;
    }
    if (owner->category != DeclCategory::kPreamble) d.decl = owner->name;
  }
}

CheckReport build_report(std::string_view src, std::string_view raw_output,
                         std::string_view file_label) {
  CheckReport r;
  auto parsed = parse_diagnostics_report(raw_output);
  r.diagnostics = std::move(parsed.diagnostics);
  r.ignored_lines = parsed.ignored_lines;
  for (auto& d : r.diagnostics) {
    if (d.file.empty()) d.file = std::string(file_label);
  }
  r.decls = index_declarations(src);
  attribute_diagnostics(r.diagnostics, r.decls);
  r.error_count = static_cast<int>(std::count_if(
      r.diagnostics.begin(), r.diagnostics.end(),
      [](const Diagnostic& d) { return d.severity == Severity::kError; }));
  r.compiled_ok = r.error_count == 0;
  return r;
}

CheckReport Checker::check(const fs::path& file) {
  if (!fs::exists(file)) fail(ErrorCode::kNotFound, "no such file: " + file.string());
  return check_source(detail::read_file(file), file.filename().string());
}

MockChecker::MockChecker(fs::path fixtures_dir) : dir_(std::move(fixtures_dir)) {
  if (!fs::is_directory(dir_)) {
    fail(ErrorCode::kWorkspaceInvalid, "mock checker fixture directory missing: " + dir_.string());
  }
}

CheckReport MockChecker::check_source(std::string_view src, std::string_view file_label) {
  ++invocations_;
  const fs::path fixture = dir_ / (sha256_hex(src) + ".txt");
  std::string raw;
  if (fs::exists(fixture)) raw = detail::read_file(fixture);
  return build_report(src, raw, file_label);
}

LakeChecker::LakeChecker(LakeCheckerOptions options) : options_(std::move(options)) {
  const fs::path& ws = options_.workspace;
  if (!fs::is_directory(ws) ||
      !(fs::exists(ws / "lakefile.lean") || fs::exists(ws / "lakefile.toml"))) {
    fail(ErrorCode::kWorkspaceInvalid, "not a Lake workspace: " + ws.string());
  }
  lake_path_ = detail::find_executable(options_.lake_binary);
  if (lake_path_.empty()) {
    fail(ErrorCode::kCheckerUnavailable, "lake executable not found: " + options_.lake_binary);
  }
}

CheckReport LakeChecker::check_source(std::string_view src, std::string_view file_label) {
  const std::size_t n = ++invocations_;
  const fs::path scratch_dir = options_.workspace / ".leaninst_scratch";
  std::error_code ec;
  fs::create_directories(scratch_dir, ec);
  const std::string rel = ".leaninst_scratch/check_" + std::to_string(::getpid()) + "_" +
                          std::to_string(n) + ".lean";
  const fs::path scratch = options_.workspace / rel;
  {
    std::ofstream out(scratch, std::ios::binary);
    if (!out) fail(ErrorCode::kIo, "cannot write scratch file " + scratch.string());
    out << src;
  }
  auto res = detail::run_process({lake_path_.string(), "env", "lean", rel}, options_.workspace,
                                 options_.timeout_seconds);
  fs::remove(scratch, ec);
  if (res.spawn_failed) {
    fail(ErrorCode::kCheckerUnavailable, "failed to start " + lake_path_.string());
  }
  if (res.timed_out) {
    fail(ErrorCode::kCheckerTimeout, "checker exceeded " +
                                         std::to_string(options_.timeout_seconds) + " s on " +
                                         std::string(file_label));
  }
  std::string raw = std::move(res.output);
  for (std::size_t p = raw.find(rel); p != std::string::npos; p = raw.find(rel, p)) {
    raw.replace(p, rel.size(), file_label);
    p += file_label.size();
  }
  CheckReport report = build_report(src, raw, file_label);
  if (res.exit_code != 0 && report.error_count == 0) {
    // Nonzero exit without parseable errors: surface the raw output.
    Diagnostic d;
    d.file = std::string(file_label);
    d.message = raw.empty() ? "checker exited with status " + std::to_string(res.exit_code)
                            : std::string(text::trim(raw));
    d.kind = normalize_error(d.message);
    report.diagnostics.push_back(std::move(d));
    attribute_diagnostics(report.diagnostics, report.decls);
    report.error_count = 1;
    report.compiled_ok = false;
  }
  return report;
}

}  // namespace leaninst
