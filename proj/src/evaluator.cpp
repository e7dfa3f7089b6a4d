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

#include "leaninst/evaluator.hpp"

#include <cstdio>
#include <set>

#include <json.hpp>

#include "leaninst/error.hpp"
#include "leaninst/text.hpp"

namespace leaninst {

using json = nlohmann::json;

FileScore score_file(std::string_view problem_id, std::string_view src, const CheckReport& report,
                     const std::vector<CommentedDecl>& commented) {
  FileScore s;
  s.problem_id = std::string(problem_id);
  s.errors = report.error_count;
  s.lines = text::LineTable(src).line_count();

  std::set<std::string> errored;
  for (const auto& d : report.diagnostics) {
    if (d.severity == Severity::kError && d.decl) errored.insert(*d.decl);
  }
  bool def_sorry = false;
  for (const auto& span : report.decls) {
    const bool clean = errored.count(span.name) == 0;
    switch (span.category) {
      case DeclCategory::kDefinition:
        ++s.def_total;
        if (span.has_sorry) def_sorry = true;
        if (clean && !span.has_sorry) ++s.def_ok;
        break;
      case DeclCategory::kTheorem:
        ++s.thm_total;
        if (clean) ++s.thm_ok;
        break;
      case DeclCategory::kInstance:
        ++s.inst_total;
        if (clean) ++s.inst_ok;
        break;
      case DeclCategory::kPreamble:
        continue;
    }
    if (span.category != DeclCategory::kDefinition && span.body_is_proof) {
      ++s.proof_obligations;
      if (report.error_count == 0 && !span.has_sorry) ++s.proofs_complete;
    }
  }
  for (const auto& c : commented) {
    if (c.category == DeclCategory::kDefinition) ++s.def_total;
    if (c.category == DeclCategory::kTheorem) ++s.thm_total;
    if (c.category == DeclCategory::kInstance) ++s.inst_total;
  }
  s.file_success = s.errors == 0 && !def_sorry && s.def_total > 0 && s.thm_total > 0 &&
                   s.inst_total > 0 && s.def_ok == s.def_total && s.thm_ok == s.thm_total &&
                   s.inst_ok == s.inst_total;
  return s;
}

std::string file_score_to_json(const FileScore& s) {
  json j = {{"problem_id", s.problem_id},
            {"def_total", s.def_total},
            {"def_ok", s.def_ok},
            {"thm_total", s.thm_total},
            {"thm_ok", s.thm_ok},
            {"inst_total", s.inst_total},
            {"inst_ok", s.inst_ok},
            {"file_success", s.file_success},
            {"proof_obligations", s.proof_obligations},
            {"proofs_complete", s.proofs_complete},
            {"errors", s.errors},
            {"lines", s.lines}};
  return j.dump();
}

FileScore file_score_from_json(std::string_view text_view) {
  try {
    const json j = json::parse(text_view);
    FileScore s;
    s.problem_id = j.at("problem_id").get<std::string>();
    s.def_total = j.at("def_total").get<int>();
    s.def_ok = j.at("def_ok").get<int>();
    s.thm_total = j.at("thm_total").get<int>();
    s.thm_ok = j.at("thm_ok").get<int>();
    s.inst_total = j.at("inst_total").get<int>();
    s.inst_ok = j.at("inst_ok").get<int>();
    s.file_success = j.at("file_success").get<bool>();
    s.proof_obligations = j.at("proof_obligations").get<int>();
    s.proofs_complete = j.at("proofs_complete").get<int>();
    s.errors = j.at("errors").get<int>();
    s.lines = j.at("lines").get<int>();
    return s;
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchemaViolation, std::string("file score: ") + e.what());
  }
}

namespace {

struct Accum {
  ClassMetrics m;
  long defs = 0, thms = 0, lines = 0;

  void add(const FileScore& s) {
    ++m.files;
    m.def.num += s.def_ok;
    m.def.den += s.def_total;
    m.thm.num += s.thm_ok;
    m.thm.den += s.thm_total;
    m.inst.num += s.inst_ok;
    m.inst.den += s.inst_total;
    m.file.num += s.file_success ? 1 : 0;
    m.file.den += 1;
    if (!s.file_success) {
      m.sc.num += s.decl_ok();
      m.sc.den += s.decl_total();
    }
    if (s.errors == 0) {
      m.ps.num += s.proofs_complete;
      m.ps.den += s.proof_obligations;
    }
    defs += s.def_total;
    thms += s.thm_total;
    lines += s.lines;
  }

  ClassMetrics finish() const {
    ClassMetrics out = m;
    if (m.files > 0) {
      out.dm = static_cast<double>(defs) / m.files;
      out.tm = static_cast<double>(thms) / m.files;
      out.fl = static_cast<double>(lines) / m.files;
    }
    return out;
  }
};

json rate_json(const Rate& r) {
  json j = {{"num", r.num}, {"den", r.den}};
  if (auto v = r.value()) {
    j["value"] = *v;
  } else {
    j["value"] = nullptr;
  }
  return j;
}

json metrics_json(const ClassMetrics& m) {
  return {{"files", m.files},       {"def_rate", rate_json(m.def)},
          {"thm_rate", rate_json(m.thm)}, {"inst_rate", rate_json(m.inst)},
          {"file_rate", rate_json(m.file)}, {"sc_rate", rate_json(m.sc)},
          {"ps_rate", rate_json(m.ps)}, {"dm", m.dm},
          {"tm", m.tm},             {"fl", m.fl}};
}

std::string pct(const Rate& r) {
  const auto v = r.value();
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", *v * 100.0);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

EvalReport aggregate(const std::vector<FileScore>& scores, const Manifest& manifest) {
  std::map<std::string, Accum> per;
  for (const auto& [cls, n] : manifest.class_counts) {
    (void)n;
    per[cls];
  }
  Accum all;
  for (const auto& s : scores) {
    const ProblemSpec* p = manifest.find(s.problem_id);
    if (!p) fail(ErrorCode::kMissingProblem, "score for unknown problem '" + s.problem_id + "'");
    per[p->class_id].add(s);
    all.add(s);
  }
  EvalReport r;
  for (const auto& [cls, acc] : per) r.per_class[cls] = acc.finish();
  r.overall = all.finish();
  return r;
}

std::string eval_report_to_json(const EvalReport& r) {
  json j;
  j["pooling"] = "declaration counts pooled across files; SC over failed files, PS over files "
                 "with zero errors";
  j["overall"] = metrics_json(r.overall);
  j["per_class"] = json::object();
  for (const auto& [cls, m] : r.per_class) j["per_class"][cls] = metrics_json(m);
  j["mv_scores"] = json::object();
  for (const auto& [id, v] : r.mv_scores) j["mv_scores"][id] = v;
  return j.dump(2);
}

std::string eval_report_to_text(const EvalReport& r) {
  std::string out;
  char row[256];
  std::snprintf(row, sizeof row, "%-10s %5s %9s %9s %9s %9s %9s %9s %6s %6s %7s\n", "class",
                "files", "def", "thm", "inst", "file", "SC", "PS", "DM", "TM", "FL");
  out += row;
  auto line = [&](const std::string& name, const ClassMetrics& m) {
    std::snprintf(row, sizeof row, "%-10s %5d %9s %9s %9s %9s %9s %9s %6s %6s %7s\n",
                  name.c_str(), m.files, pct(m.def).c_str(), pct(m.thm).c_str(),
                  pct(m.inst).c_str(), pct(m.file).c_str(), pct(m.sc).c_str(),
                  pct(m.ps).c_str(), fixed(m.dm, 2).c_str(), fixed(m.tm, 2).c_str(),
                  fixed(m.fl, 1).c_str());
    out += row;
  };
  for (const auto& [cls, m] : r.per_class) line(cls, m);
  line("overall", r.overall);
  if (!r.mv_scores.empty()) {
    out += "\nmajority vote\n";
    for (const auto& [id, v] : r.mv_scores) out += "  " + id + "  " + fixed(v, 2) + "\n";
  }
  return out;
}

std::optional<int> parse_judge_score(std::string_view t) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < '0' || t[i] > '9') continue;
    std::size_t e = i;
    while (e < t.size() && t[e] >= '0' && t[e] <= '9') ++e;
    if (e - i > 3) return std::nullopt;
    const int v = std::stoi(std::string(t.substr(i, e - i)));
    if (v > 100) return std::nullopt;
    return v;
  }
  return std::nullopt;
}

MajorityVoteResult majority_vote(const ProblemSpec& problem, std::string_view src,
                                 const std::vector<Diagnostic>& diagnostics,
                                 GatewaySession& judge, const PromptLibrary& prompts, int rounds) {
  if (rounds <= 0) fail(ErrorCode::kInvalidArgument, "majority_vote: rounds must be positive");
  std::string errors;
  for (const auto& d : diagnostics) {
    if (d.severity != Severity::kError) continue;
    errors += d.file + ":" + std::to_string(d.line) + ":" + std::to_string(d.col) +
              ": error: " + d.message + "\n";
  }
  if (errors.empty()) errors = "none\n";
  const std::string prompt = prompts.render(
      prompt_ids::kMajorityVoting,
      {{"problem", problem.description}, {"candidate", std::string(src)}, {"error_messages", errors}});
  MajorityVoteResult r;
  for (int i = 0; i < rounds; ++i) {
    std::optional<int> v;
    for (int sample : {i, rounds + i}) {
      ++r.calls;
      v = parse_judge_score(judge.complete(prompt, sample).text);
      if (v) break;
    }
    if (v) {
      r.values.push_back(*v);
    } else {
      ++r.dropped;
    }
  }
  if (2 * static_cast<int>(r.values.size()) < rounds) {
    fail(ErrorCode::kMvInconclusive, "majority vote: only " + std::to_string(r.values.size()) +
                                         " of " + std::to_string(rounds) + " rounds parsed");
  }
  long sum = 0;
  for (int v : r.values) sum += v;
  r.score = static_cast<double>(sum) / static_cast<double>(r.values.size());
  return r;
}

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::kGeneration: return "generation";
    case Stage::kBackboneCorrection: return "backbone_correction";
    case Stage::kProofGeneration: return "proof_generation";
    case Stage::kProofCorrection: return "proof_correction";
    case Stage::kHarmlessFixing: return "harmless_fixing";
  }
  return "generation";
}

StageTiming timing_report(const std::vector<StageDurations>& records) {
  StageTiming t;
  std::int64_t total = 0;
  for (const auto& r : records) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i] < 0) fail(ErrorCode::kInvalidArgument, "timing_report: negative duration");
      t.totals[i] += r[i];
      total += r[i];
    }
  }
  if (total == 0) fail(ErrorCode::kEmptyRunSet, "timing_report: no recorded stage time");
  for (std::size_t i = 0; i < t.totals.size(); ++i) {
    t.shares[i] = 100.0 * static_cast<double>(t.totals[i]) / static_cast<double>(total);
  }
  return t;
}

std::string timing_csv(const StageTiming& t) {
  std::string out = "stage,total_ms,share_percent\n";
  for (Stage s : kAllStages) {
    const auto i = static_cast<std::size_t>(s);
    out += std::string(stage_name(s)) + "," + std::to_string(t.totals[i]) + "," +
           fixed(t.shares[i], 3) + "\n";
  }
  return out;
}

}  // namespace leaninst
