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

#include "leaninst/postprocessor.hpp"

#include <algorithm>
#include <map>

#include "leaninst/error.hpp"
#include "leaninst/text.hpp"

namespace leaninst {

bool references_name(std::string_view text_view, std::string_view name) {
  if (name.empty()) return false;
  const auto dot = name.rfind('.');
  const std::string last(dot == std::string_view::npos ? name : name.substr(dot + 1));
  const std::string suffix = "." + last;
  const std::string prefix = std::string(name) + ".";
  for (const auto& t : text::identifier_tokens(text_view)) {
    if (t.text == name) return true;
    if (t.text.size() > prefix.size() && t.text.compare(0, prefix.size(), prefix) == 0) return true;
    if (t.text.size() > suffix.size() &&
        t.text.compare(t.text.size() - suffix.size(), suffix.size(), suffix) == 0) {
      return true;
    }
  }
  return false;
}

namespace {

struct SpanGeometry {
  std::size_t base = 0;           // offset of span start in src
  std::size_t content_end = 0;    // end of the last nonblank line, before its newline
  int last_nonblank = 0;
};

SpanGeometry geometry(std::string_view src, const text::LineTable& lines, const DeclSpan& span) {
  SpanGeometry g;
  g.base = lines.line_start(span.start_line);
  g.last_nonblank = span.start_line;
  for (int l = span.end_line; l >= span.start_line; --l) {
    if (!text::is_blank(lines.line(l))) {
      g.last_nonblank = l;
      break;
    }
  }
  g.content_end = lines.line_start(g.last_nonblank) + lines.line(g.last_nonblank).size();
  (void)src;
  return g;
}

std::string splice(std::string_view src, std::size_t from, std::size_t to, std::string_view with) {
  std::string out(src.substr(0, from));
  out += with;
  out += src.substr(to);
  return out;
}

}  // namespace

std::string sorry_out_proof(std::string_view src, const DeclSpan& span, int error_line) {
  if (span.category == DeclCategory::kPreamble) return std::string(src);
  const text::LineTable lines(src);
  if (lines.line_count() == 0 || span.end_line > lines.line_count()) return std::string(src);
  const std::string_view body = span_text(src, span);
  const auto delim = find_body_delimiter(body);
  if (!delim) return std::string(src);
  const SpanGeometry g = geometry(src, lines, span);
  const int delim_line = lines.line_of_offset(g.base + delim->offset);
  if (error_line < delim_line) return std::string(src);
  const std::size_t after_delim = g.base + delim->end;
  if (after_delim >= g.content_end) {
    if (delim->kind == BodyDelimiter::Kind::kWhere) return std::string(src);
    return splice(src, after_delim, g.content_end, " sorry");
  }
  const auto regions = text::classify_regions(src);
  auto is_code_line = [&](int l) {
    const auto s = lines.line(l);
    const std::size_t ind = text::indent_of(s);
    return ind < s.size() && regions[lines.line_start(l) + ind] == text::Region::kCode;
  };

  // First nonblank code line after the delimiter line sets the body indent.
  int first_body = 0;
  for (int l = delim_line + 1; l <= g.last_nonblank; ++l) {
    if (is_code_line(l)) {
      first_body = l;
      break;
    }
  }

  if (delim->kind == BodyDelimiter::Kind::kWhere) {
    if (!first_body || error_line <= delim_line) return std::string(src);
    const std::size_t field_indent = text::indent_of(lines.line(first_body));
    int field = 0;
    for (int l = first_body; l <= std::min(error_line, g.last_nonblank); ++l) {
      if (is_code_line(l) && text::indent_of(lines.line(l)) <= field_indent) field = l;
    }
    if (!field) return std::string(src);
    int field_last = field;
    for (int l = field + 1; l <= g.last_nonblank; ++l) {
      if (is_code_line(l) && text::indent_of(lines.line(l)) <= field_indent) break;
      if (!text::is_blank(lines.line(l))) field_last = l;
    }
    const std::string_view fl = lines.line(field);
    const auto assign = fl.find(":=");
    if (assign == std::string_view::npos) return std::string(src);
    const std::size_t from = lines.line_start(field) + assign + 2;
    const std::size_t to = lines.line_start(field_last) + lines.line(field_last).size();
    return splice(src, from, to, " sorry");
  }

  if (delim->kind == BodyDelimiter::Kind::kAssign || !first_body || error_line <= delim_line) {
    return splice(src, after_delim, g.content_end, " sorry");
  }
  const std::size_t base_indent = text::indent_of(lines.line(first_body));
  int top = 0;
  for (int l = first_body; l <= std::min(error_line, g.last_nonblank); ++l) {
    if (is_code_line(l) && text::indent_of(lines.line(l)) <= base_indent) top = l;
  }
  if (!top) return splice(src, after_delim, g.content_end, " sorry");
  return splice(src, lines.line_start(top), g.content_end,
                std::string(base_indent, ' ') + "sorry");
}

std::set<std::string> comment_closure(std::string_view src, const std::vector<DeclSpan>& spans,
                                      const std::set<std::string>& seeds) {
  std::set<std::string> closed = seeds;
  std::vector<std::pair<const DeclSpan*, std::string_view>> candidates;
  for (const auto& s : spans) {
    if (s.category != DeclCategory::kPreamble) candidates.emplace_back(&s, span_text(src, s));
  }
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [s, text_view] : candidates) {
      if (closed.count(s->name)) continue;
      for (const auto& n : closed) {
        if (references_name(text_view, n)) {
          closed.insert(s->name);
          grew = true;
          break;
        }
      }
    }
  }
  return closed;
}

std::string comment_out(std::string_view src, const std::vector<DeclSpan>& spans,
                        const std::set<std::string>& names) {
  const text::LineTable lines(src);
  std::vector<bool> mark(static_cast<std::size_t>(lines.line_count()) + 1, false);
  for (const auto& s : spans) {
    if (s.category == DeclCategory::kPreamble || !names.count(s.name)) continue;
    for (int l = s.start_line; l <= s.end_line && l <= lines.line_count(); ++l) mark[l] = true;
  }
  std::string out;
  out.reserve(src.size() + 64);
  for (int l = 1; l <= lines.line_count(); ++l) {
    const std::size_t b = lines.line_start(l);
    const std::size_t e = lines.line_end_inclusive(l);
    if (mark[l] && !text::is_blank(lines.line(l))) out += "-- ";
    out += src.substr(b, e - b);
  }
  return out;
}

int count_titled_blocks(std::string_view report) {
  static const char* const kEnvs[] = {"definition", "lemma",   "theorem",  "proposition",
                                      "corollary",  "instance", "example", "assumption"};
  int n = 0;
  for (std::size_t p = report.find("\\begin{"); p != std::string_view::npos;
       p = report.find("\\begin{", p + 1)) {
    const std::size_t b = p + 7;
    const std::size_t e = report.find('}', b);
    if (e == std::string_view::npos) break;
    std::string env(report.substr(b, e - b));
    if (!env.empty() && env.back() == '*') env.pop_back();
    for (const char* k : kEnvs) {
      if (env == k) {
        ++n;
        break;
      }
    }
  }
  for (std::string_view l : text::split_lines(report)) {
    const auto t = text::trim(l);
    std::size_t h = 0;
    while (h < t.size() && t[h] == '#') ++h;
    if (h > 0 && h < t.size() && t[h] == ' ') ++n;
  }
  return n;
}

Postprocessor::Postprocessor(RepairEngine& engine, const PromptLibrary& prompts,
                             int max_final_fix_attempts)
    : engine_(engine), prompts_(prompts), max_attempts_(max_final_fix_attempts) {}

namespace {

std::string format_errors(const CheckReport& r) {
  std::string out;
  for (const auto& d : r.diagnostics) {
    if (d.severity != Severity::kError) continue;
    out += d.file + ":" + std::to_string(d.line) + ":" + std::to_string(d.col) + ": error: " +
           d.message + "\n";
  }
  return out;
}

void finish(FinalArtifact& a, const std::vector<DeclSpan>& decls) {
  a.sorried_decls.clear();
  for (const auto& d : decls) {
    if (d.category != DeclCategory::kPreamble && d.has_sorry) a.sorried_decls.push_back(d.name);
  }
  a.commented_out_decls.clear();
  for (const auto& c : a.commented) a.commented_out_decls.push_back(c.name);
  a.fully_proved = a.harmless && a.sorried_decls.empty() && a.commented_out_decls.empty();
}

}  // namespace

FinalArtifact Postprocessor::harmless_fix(std::string_view src, GatewaySession& session,
                                          std::string_view label) {
  FinalArtifact a;
  std::string cur(src);
  CheckReport report = engine_.check(cur, label);
  std::string best = cur;
  int best_errors = report.error_count;
  std::vector<CommentedDecl> best_commented;
  auto done = [&](int phase) {
    a.source = cur;
    a.harmless = true;
    a.errors = 0;
    a.phase = phase;
    finish(a, report.decls);
    return a;
  };
  if (report.compiled_ok) return done(0);

  // Phase 1: sorry out failing proof bodies, last span first.
  {
    std::map<int, int> first_error;  // span index -> earliest error line
    for (const auto& d : report.diagnostics) {
      if (d.severity != Severity::kError) continue;
      for (std::size_t i = 0; i < report.decls.size(); ++i) {
        const DeclSpan& s = report.decls[i];
        const bool owns = (d.line >= s.start_line && d.line <= s.end_line) ||
                          (i + 1 == report.decls.size() && d.line > s.end_line);
        if (!owns) continue;
        if ((s.category == DeclCategory::kTheorem || s.category == DeclCategory::kInstance) &&
            s.body_line > 0) {
          auto it = first_error.find(static_cast<int>(i));
          if (it == first_error.end() || d.line < it->second) first_error[static_cast<int>(i)] = d.line;
        }
        break;
      }
    }
    std::string next = cur;
    for (auto it = first_error.rbegin(); it != first_error.rend(); ++it) {
      next = sorry_out_proof(next, report.decls[static_cast<std::size_t>(it->first)], it->second);
    }
    if (next != cur) {
      cur = std::move(next);
      report = engine_.check(cur, label);
      if (report.error_count < best_errors) {
        best = cur;
        best_errors = report.error_count;
      }
      if (report.compiled_ok) return done(1);
    }
  }

  // Phase 2: comment out erroring declarations and everything that refers to
  // them. Repeated while it makes progress.
  for (int round = 0; round < 3 && !report.compiled_ok; ++round) {
    std::set<std::string> seeds;
    for (const auto& d : report.diagnostics) {
      if (d.severity == Severity::kError && d.decl) seeds.insert(*d.decl);
    }
    if (seeds.empty()) break;
    const auto closure = comment_closure(cur, report.decls, seeds);
    std::string next = comment_out(cur, report.decls, closure);
    // `variable` lines naming a removed declaration go too.
    {
      const text::LineTable lines(next);
      std::string rebuilt;
      for (int l = 1; l <= lines.line_count(); ++l) {
        const auto line = lines.line(l);
        const std::size_t b = lines.line_start(l);
        const std::size_t e = lines.line_end_inclusive(l);
        bool drop = false;
        if (line.substr(0, 9) == "variable " || line.substr(0, 9) == "variable\t") {
          for (const auto& n : closure) {
            if (references_name(line, n)) {
              drop = true;
              break;
            }
          }
        }
        if (drop) rebuilt += "-- ";
        rebuilt += next.substr(b, e - b);
      }
      next = std::move(rebuilt);
    }
    for (const auto& s : report.decls) {
      if (s.category != DeclCategory::kPreamble && closure.count(s.name)) {
        a.commented.push_back({s.name, s.category});
      }
    }
    if (next == cur) break;
    cur = std::move(next);
    report = engine_.check(cur, label);
    if (report.error_count < best_errors) {
      best = cur;
      best_errors = report.error_count;
      best_commented = a.commented;
    }
    if (report.compiled_ok) return done(2);
  }

  // Phase 3: model rewrite; only a clean file is accepted.
  for (int attempt = 0; attempt < max_attempts_; ++attempt) {
    ++a.llm_attempts;
    const std::string prompt = prompts_.render(
        prompt_ids::kHarmlessRewrite, {{"lean_content", cur}, {"error_messages", format_errors(report)}});
    std::string candidate;
    try {
      candidate = extract_code_block(session.complete(prompt, attempt).text);
    } catch (const GatewayError& e) {
      a.failure_report += std::string("rewrite aborted: ") + e.what() + "\n";
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyCompletion) throw;
      continue;
    }
    CheckReport r = engine_.check(candidate, label);
    if (r.compiled_ok) {
      cur = std::move(candidate);
      report = std::move(r);
      return done(3);
    }
  }

  a.source = best;
  a.harmless = false;
  a.phase = -1;
  a.errors = best_errors;
  a.commented = best_commented;
  const CheckReport final_report = engine_.check(best, label);
  a.failure_report += "harmless fixing failed; " + std::to_string(best_errors) +
                      " error(s) remain\n" + format_errors(final_report);
  finish(a, final_report.decls);
  return a;
}

Backtranslation Postprocessor::backtranslate(std::string_view src, GatewaySession& session) {
  if (text::is_blank(src)) fail(ErrorCode::kEmptySource, "backtranslate: empty source");
  Backtranslation b;
  const std::string prompt =
      prompts_.render(prompt_ids::kBacktranslation, {{"lean_content", std::string(src)}});
  b.report = session.complete(prompt).text;
  for (const auto& d : index_declarations(src)) {
    if (d.category != DeclCategory::kPreamble) ++b.expected_blocks;
  }
  b.found_blocks = count_titled_blocks(b.report);
  b.count_matches = b.found_blocks == b.expected_blocks;
  return b;
}

}  // namespace leaninst
