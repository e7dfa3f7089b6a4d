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

#include "leaninst/repair_engine.hpp"

#include <algorithm>
#include <set>

#include "leaninst/error.hpp"
#include "leaninst/static_fixer.hpp"
#include "leaninst/text.hpp"

namespace leaninst {

int count_sorries(std::string_view src) { return static_cast<int>(scan_sorries(src).size()); }

RepairEngine::RepairEngine(Checker& checker, ErrorKB& kb, const PromptLibrary& prompts,
                           std::shared_ptr<Clock> clock, RepairLimits limits)
    : checker_(checker), kb_(kb), prompts_(prompts), clock_(std::move(clock)), limits_(limits) {}

CheckReport RepairEngine::check(std::string_view src, std::string_view label) {
  try {
    return checker_.check_source(src, label);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kCheckerTimeout) throw;
    CheckReport r;
    r.decls = index_declarations(src);
    Diagnostic d;
    d.file = std::string(label);
    d.message = "(deterministic) timeout: " + std::string(e.what());
    d.kind = ErrorKind::kTimeout;
    r.diagnostics.push_back(std::move(d));
    attribute_diagnostics(r.diagnostics, r.decls);
    r.error_count = 1;
    r.compiled_ok = false;
    return r;
  }
}

namespace {

bool names_decl(const std::string& token, const std::string& name) {
  if (token == name) return true;
  return token.size() > name.size() + 1 &&
         token.compare(token.size() - name.size(), name.size(), name) == 0 &&
         token[token.size() - name.size() - 1] == '.';
}

std::vector<std::string> mentioned(std::string_view text, const std::vector<std::string>& names) {
  std::vector<std::string> out;
  const auto toks = text::identifier_tokens(text);
  for (const auto& n : names) {
    for (const auto& t : toks) {
      if (names_decl(t.text, n)) {
        out.push_back(n);
        break;
      }
    }
  }
  return out;
}

// Header of a declaration up to its body delimiter.
std::string statement_of(std::string_view span) {
  if (auto d = find_body_delimiter(span)) return std::string(text::trim(span.substr(0, d->offset)));
  return std::string(text::trim(span));
}

const DeclSpan* span_at(const std::vector<DeclSpan>& spans, int line) {
  if (spans.empty()) return nullptr;
  for (const auto& s : spans) {
    if (line >= s.start_line && line <= s.end_line) return &s;
  }
  return &spans.back();
}

std::string format_solution(std::size_t i, const ScoredEntry& s) {
  const KBEntry& e = s.entry;
  std::string out = "Solution " + std::to_string(i) + " (" + error_kind_name(e.kind) + ")\n";
  out += "Error: " + e.message + "\n";
  out += "Faulty code:\n" + e.faulty_snippet + "\n";
  out += "Fixed code:\n" + e.fixed_snippet + "\n";
  out += "Error Type: " + e.explanation.error_type + "\n";
  out += "Root Cause: " + e.explanation.root_cause + "\n";
  out += "Fix Description: " + e.explanation.fix_description + "\n";
  out += "Why It Works: " + e.explanation.why_it_works + "\n";
  return out;
}

}  // namespace

std::string RepairEngine::build_correction_prompt(std::string_view src, const CheckReport& report,
                                                  const Template* tmpl, std::string_view label,
                                                  std::vector<std::int64_t>* kb_hits) {
  const text::LineTable lines(src);
  const int nlines = lines.line_count();
  std::string prompt =
      prompts_.render(prompt_ids::kCorrectionHead, {{"self.current_code", std::string(src)}});

  std::vector<const Diagnostic*> errors;
  for (const auto& d : report.diagnostics) {
    if (d.severity == Severity::kError) errors.push_back(&d);
  }
  int number = 0;
  for (const Diagnostic* d : errors) {
    ++number;
    std::string context;
    std::string block;
    if (nlines > 0) {
      const int line = std::clamp(d->line, 1, nlines);
      const int lo = std::max(1, line - limits_.context_radius);
      const int hi = std::min(nlines, line + limits_.context_radius);
      for (int l = lo; l <= hi; ++l) context += std::string(lines.line(l)) + "\n";
      if (const DeclSpan* s = span_at(report.decls, line)) block = std::string(span_text(src, *s));
    }
    prompt += prompts_.render(prompt_ids::kCorrectionError,
                              {{"Number", std::to_string(number)},
                               {"self.lean_file", std::string(label)},
                               {"error['line']", std::to_string(d->line)},
                               {"error['message']", d->message},
                               {"local context", context},
                               {"error['full_context']", block}});
  }

  std::set<ErrorKind> kinds_seen;
  for (const Diagnostic* d : errors) {
    if (!kinds_seen.insert(d->kind).second) continue;
    const RetrievalResult r = kb_.retrieve(d->message, limits_.retrieval_k);
    if (r.entries.empty()) continue;
    std::string solutions;
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
      if (kb_hits) kb_hits->push_back(r.entries[i].entry.id);
      solutions += format_solution(i + 1, r.entries[i]);
    }
    prompt += prompts_.render(prompt_ids::kCorrectionSolutions,
                              {{"kind", error_kind_name(d->kind)}, {"solutions", solutions}});
  }

  if (tmpl) {
    std::vector<std::string> thm_names;
    for (const auto& s : tmpl->decl_index) {
      if (s.category == DeclCategory::kTheorem) thm_names.push_back(s.name);
    }
    std::vector<std::string> wanted;
    bool apply_failed = false;
    auto want = [&](const std::string& n) {
      if (std::find(wanted.begin(), wanted.end(), n) == wanted.end()) wanted.push_back(n);
    };
    for (const Diagnostic* d : errors) {
      for (const auto& n : mentioned(d->message, thm_names)) want(n);
      if (d->kind == ErrorKind::kApplyFailed) {
        apply_failed = true;
        if (nlines > 0) {
          if (const DeclSpan* s = span_at(report.decls, std::clamp(d->line, 1, nlines))) {
            for (const auto& n : mentioned(span_text(src, *s), thm_names)) want(n);
          }
        }
      }
    }
    if (apply_failed && wanted.empty()) {
      for (const auto& n : tmpl->theorems()) want(n);
    }
    if (!wanted.empty()) {
      std::string details;
      for (const auto& n : wanted) {
        if (const DeclSpan* s = tmpl->find_decl(n)) {
          details += statement_of(span_text(tmpl->lean_source, *s)) + "\n\n";
        }
      }
      prompt += prompts_.render(prompt_ids::kCorrectionTheorems, {{"theorems", details}});
    }
  }
  prompt += prompts_.render(prompt_ids::kCorrectionTail, {});
  return prompt;
}

std::string RepairEngine::fix_once(std::string_view src, const CheckReport& report,
                                   GatewaySession& session, const Template* tmpl,
                                   std::string_view label, std::vector<std::int64_t>* kb_hits,
                                   std::string* transcript) {
  const std::string prompt = build_correction_prompt(src, report, tmpl, label, kb_hits);
  const Completion c = session.complete(prompt);
  if (transcript) *transcript = c.request_id;
  return extract_code_block(c.text);
}

RepairOutcome RepairEngine::repair(std::string_view src, GatewaySession& session,
                                   const Template* tmpl, std::string_view label,
                                   const CandidateSink& sink) {
  RepairOutcome out;
  std::string best(src);
  CheckReport input_report = check(src, label);
  ++out.checker_calls;
  CandidateScore best_score{input_report.error_count, count_sorries(src)};
  out.input_errors = best_score.errors;
  out.input_sorries = best_score.sorries;
  auto consider = [&](const std::string& cand, const CheckReport& r) {
    const CandidateScore s{r.error_count, count_sorries(cand)};
    if (s <= best_score) {
      best_score = s;
      best = cand;
    }
  };

  std::string cur(src);
  CheckReport cur_report = std::move(input_report);
  std::optional<std::string> first_error;

  // Each pass: static rules, check, and if still broken one LLM correction.
  for (int step = 0; step <= limits_.max_correction_steps; ++step) {
    FixResult fixed = apply_rules(cur);
    CheckReport report;
    if (fixed.source == cur) {
      report = cur_report;
    } else {
      report = check(fixed.source, label);
      ++out.checker_calls;
      consider(fixed.source, report);
    }
    if (report.compiled_ok) {
      out.resolved = true;
      cur = fixed.source;
      break;
    }
    if (step == limits_.max_correction_steps) break;
    if (!first_error) {
      for (const auto& d : report.diagnostics) {
        if (d.severity == Severity::kError) {
          first_error = d.message;
          break;
        }
      }
    }

    IterationLog log;
    log.errors_before = report.error_count;
    log.rule_ids = fixed.applied;
    std::string candidate;
    try {
      candidate = fix_once(fixed.source, report, session, tmpl, label, &log.kb_hits, &log.transcript);
    } catch (const GatewayError& e) {
      out.gateway_error = e.what();
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyCompletion) throw;
      candidate = fixed.source;
    }
    ++out.iterations_used;
    if (sink) sink(out.iterations_used, candidate);
    CheckReport cand_report = check(candidate, label);
    ++out.checker_calls;
    consider(candidate, cand_report);
    log.errors_after = cand_report.error_count;
    log.sorries_after = count_sorries(candidate);
    out.per_iteration.push_back(log);

    if (cand_report.compiled_ok) {
      out.resolved = true;
      if (first_error && candidate != fixed.source) {
        try {
          out.kb_entry = kb_.record_fix(*first_error, fixed.source, candidate, session, prompts_).id;
        } catch (const GatewayError&) {
          // The fix stands even if it could not be explained.
        }
      }
      cur = candidate;
      break;
    }
    cur = std::move(candidate);
    cur_report = std::move(cand_report);
  }

  out.best_candidate = best;
  out.final_source = best;
  out.final_errors = best_score.errors;
  out.final_sorries = best_score.sorries;
  if (out.resolved) out.resolved = best_score.errors == 0;
  return out;
}

namespace {

std::string sorry_context(std::string_view src) {
  const auto sites = scan_sorries(src);
  if (sites.empty()) return {};
  const auto decls = index_declarations(src);
  std::string out = "\n\n[Goals]\n";
  int k = 0;
  for (const auto& site : sites) {
    ++k;
    const DeclSpan* owner = nullptr;
    for (const auto& d : decls) {
      if (site.line >= d.start_line && site.line <= d.end_line) owner = &d;
    }
    out += "\n[Goal " + std::to_string(k) + "] line " + std::to_string(site.line);
    if (owner && owner->category != DeclCategory::kPreamble) out += " in " + owner->name;
    out += "\n";
    if (owner) out += std::string(span_text(src, *owner));
  }
  return out;
}

}  // namespace

ProofOutcome RepairEngine::refine_proofs(std::string_view src, GatewaySession& session,
                                         const Template& tmpl, std::string_view label,
                                         const CandidateSink& sink) {
  ProofOutcome out;
  out.source = std::string(src);
  out.unresolved_sorries = count_sorries(src);
  if (out.unresolved_sorries == 0) return out;

  int candidate_no = 0;
  for (int attempt = 0; attempt < limits_.max_proof_attempts && out.unresolved_sorries > 0;
       ++attempt) {
    ++out.attempts;
    const std::string prompt =
        prompts_.render(prompt_ids::kProofGeneration,
                        {{"lean_content", out.source}, {"example_content", tmpl.lean_source}}) +
        sorry_context(out.source);
    const std::int64_t t0 = clock_->now_ms();
    std::string candidate;
    try {
      const Completion c = session.complete(prompt, attempt);
      candidate = extract_code_block(c.text);
    } catch (const GatewayError& e) {
      out.generation_ms += clock_->now_ms() - t0;
      out.gateway_error = e.what();
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyCompletion) throw;
      out.generation_ms += clock_->now_ms() - t0;
      continue;
    }
    const std::int64_t t1 = clock_->now_ms();
    out.generation_ms += t1 - t0;
    if (sink) sink(++candidate_no, candidate);

    RepairOutcome r = repair(candidate, session, &tmpl, label,
                             [&](int, const std::string& s) {
                               if (sink) sink(++candidate_no, s);
                             });
    out.correction_ms += clock_->now_ms() - t1;
    const bool accept = r.final_errors == 0 && r.final_sorries < out.unresolved_sorries;
    if (accept) {
      out.source = r.final_source;
      out.unresolved_sorries = r.final_sorries;
      out.improved = true;
    }
    const bool stop = r.gateway_error.has_value();
    if (stop) out.gateway_error = r.gateway_error;
    out.repairs.push_back(std::move(r));
    if (stop) break;
  }
  return out;
}

}  // namespace leaninst
