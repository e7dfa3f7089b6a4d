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

// Acceptance checks. Prints one line per criterion and exits nonzero if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "leaninst/error.hpp"
#include "leaninst/error_kb.hpp"
#include "leaninst/evaluator.hpp"
#include "leaninst/lean_driver.hpp"
#include "leaninst/pipeline.hpp"
#include "leaninst/postprocessor.hpp"
#include "leaninst/repair_engine.hpp"
#include "leaninst/static_fixer.hpp"
#include "leaninst/template_store.hpp"
#include "support.hpp"

using namespace leaninst;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<std::string> fixture_sources() {
  std::vector<std::string> out;
  for (const auto* dir : {"templates", "examples"}) {
    std::vector<fs::path> paths;
    for (const auto& e : fs::directory_iterator(testing::assets_dir() / dir)) {
      if (e.path().extension() == ".lean") paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) out.push_back(testing::read_file(p));
  }
  out.push_back(testing::read_file(testing::fixtures_dir() / "lean" / "wavelet.lean"));
  out.push_back(testing::read_file(testing::fixtures_dir() / "lean" / "lasso_reference.lean"));
  return out;
}

// 1. Per-class file success counts over a 42-file run dir.
Verdict file_rate() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Cls {
    const char* id;
    int files, ok;
  };
  const std::vector<Cls> classes = {{"PGM", 9, 7}, {"GD", 9, 4}, {"BCD", 9, 6}, {"Nesterov", 8, 5}, {"ADMM", 7, 2}};
  testing::TempDir run;
  std::string manifest;
  for (const auto& c : classes) {
    for (int i = 0; i < c.files; ++i) {
      const std::string id = std::string(c.id) + "_" + std::to_string(i);
      ProblemSpec p{id, c.id, id, "fixture problem", "", c.id, "none"};
      manifest += problem_to_json_line(p) + "\n";
      RunRecord r;
      r.problem_id = id;
      r.class_id = c.id;
      r.status = "complete";
      FileScore s;
      s.problem_id = id;
      s.def_total = s.thm_total = s.inst_total = 1;
      s.def_ok = s.inst_ok = 1;
      s.thm_ok = i < c.ok ? 1 : 0;
      s.file_success = i < c.ok;
      r.score = s;
      testing::write_file(run / id / "record.json", run_record_to_json(r));
    }
  }
  testing::write_file(run / "manifest.jsonl", manifest);
  const EvalReport report = evaluate_run_dir(run.path());
  const double overall = *report.overall.file.value() * 100;
  bool ok = std::abs(overall - 57.14) <= 0.01;
  std::string per;
  for (const auto& c : classes) {
    const auto& m = report.per_class.at(c.id);
    const double expect = static_cast<double>(c.ok) / c.files;
    ok = ok && m.files == c.files && std::abs(*m.file.value() - expect) < 1e-12;
    per += std::string(" ") + c.id + "=" + std::to_string(m.file.num) + "/" + std::to_string(m.file.den);
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 1.0;
  return {ok, "file_rate " + fmt("%.2f%%", overall) + per + fmt(" in %.3fs", secs)};
}

// 2. Frequency vector of the shipped error corpus.
Verdict taxonomy() {
  std::map<ErrorKind, int> counts;
  int total = 0, mislabeled = 0;
  const std::string data = testing::read_file(testing::assets_dir() / "errors" / "corpus.jsonl");
  for (auto line : text::split_lines(data)) {
    if (text::is_blank(line)) continue;
    const auto j = nlohmann::json::parse(line);
    const ErrorKind k = normalize_error(j.at("message").get<std::string>());
    ++counts[k];
    ++total;
    if (error_kind_name(k) != j.at("kind").get<std::string>()) ++mislabeled;
  }
  const std::vector<int> expect = {21, 19, 7, 7, 7, 4, 2, 2, 2, 1, 1, 1, 1};
  std::vector<int> got;
  std::string shown;
  for (ErrorKind k : kAllErrorKinds) {
    got.push_back(counts[k]);
    shown += (shown.empty() ? "" : ",") + std::to_string(counts[k]);
  }
  return {got == expect && total == 75 && mislabeled == 0,
          "[" + shown + "] total " + std::to_string(total)};
}

// 3. The three case-study messages.
Verdict case_studies() {
  const std::vector<std::pair<std::string, ErrorKind>> cases = {
      {"failed to synthesize\n  HSub (Fin m → ℝ) (EuclideanSpace ℝ (Fin m)) ?m.7571\n"
       "Additional diagnostic information may be available using the `set_option diagnostics true` command.",
       ErrorKind::kFailedToSynthesize},
      {"unexpected token 'def'; expected ')', ',' or ':'", ErrorKind::kUnexpectedToken},
      {"don't know how to synthesize implicit argument 'δ'\n  @huber_loss (?m.2688 f self x i) (A i ⬝ᵥ x - b i)",
       ErrorKind::kTypeMismatch}};
  bool ok = true;
  std::string shown;
  for (const auto& [msg, want] : cases) {
    const ErrorKind got = normalize_error(msg);
    ok = ok && got == want;
    shown += (shown.empty() ? "" : ", ") + std::string(error_kind_name(got));
  }
  return {ok, shown};
}

// 4. Scripted Lasso run under the mock checker.
Verdict lasso_trace() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path conf = testing::fixtures_dir() / "lasso" / "lasso.conf";
  testing::TempDir a, b;
  auto run = [&](const fs::path& dir) {
    RunConfig cfg = load_config(conf, false);
    cfg.run_dir = dir;
    return run_pipeline(cfg, "pgm_lasso");
  };
  const auto sa = run(a / "run");
  const auto sb = run(b / "run");
  if (sa.records.size() != 1) return {false, "no record"};
  const RunRecord& r = sa.records[0];
  // Trace: skeleton 1, backbone correction 1 (+1 explanation of the fix),
  // proof samples 3, proof correction 1 (+1 explanation), rewrite 0,
  // back-translation 1.
  const int expected = 1 + (1 + 1) + 3 + (1 + 1) + 0 + 1;
  const int obligations = r.score ? r.score->proof_obligations : 0;
  const RepairLimits lim;
  const int bound = 3 + lim.max_correction_steps * (1 + obligations) +
                    lim.max_proof_attempts * (1 + lim.max_correction_steps);
  const std::string final_src = testing::read_file(a / "run" / "pgm_lasso" / "final.lean");
  bool identical = true;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a / "run")) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a / "run"));
  }
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b / "run")) count_b += e.is_regular_file();
  identical = files.size() == count_b;
  for (const auto& f : files) {
    identical = identical && testing::read_file(a / "run" / f) == testing::read_file(b / "run" / f);
  }
  const double secs = seconds_since(t0);
  const bool has_inst = final_src.find("instance pg_Lasso.pg") != std::string::npos;
  const bool ok = has_inst && r.gateway_calls == expected && r.gateway_calls <= bound + 3 && identical &&
                  sb.records.size() == 1 && secs < 5.0;
  return {ok, "calls " + std::to_string(r.gateway_calls) + "/" + std::to_string(expected) +
                  (has_inst ? ", instance present" : ", instance missing") +
                  (identical ? ", runs identical" : ", runs differ") + fmt(", %.2fs", secs)};
}

// 5. Never-worse repair over randomized scenarios.
Verdict never_worse() {
  testing::Rng rng(5150);
  const PromptLibrary prompts = testing::shipped_prompts();
  int worse = 0, scenarios = 0;
  for (; scenarios < 250; ++scenarios) {
    auto make = [&] {
      std::string s;
      const int n = 1 + rng.below(5);
      for (int i = 0; i < n; ++i) {
        s += "theorem t" + std::to_string(i) + " : True := by\n  ";
        const int pick = rng.below(3);
        s += pick == 0 ? "sorry" : pick == 1 ? "exact BAD" : "trivial";
        s += "\n";
      }
      return std::string(text::trim(s));
    };
    const std::string input = make();
    std::vector<std::string> replies;
    for (int i = 0; i < 6; ++i) replies.push_back(make());
    const int mode = rng.below(3);
    std::size_t next = 0;
    auto clock = std::make_shared<VirtualClock>();
    Gateway gw(testing::backend([&](const CompletionRequest& r) -> std::string {
                 if (std::string_view(r.prompt).find("[Task]") == std::string_view::npos) {
                   return "Error Type: a\nRoot Cause: b\nFix Description: c\nWhy It Works: d";
                 }
                 if (mode == 0) return testing::fenced(input);
                 if (mode == 1) return testing::fenced(replies[next++ % replies.size()]);
                 return "no code here";
               }),
               clock);
    GatewaySession session(gw, "s", GenParams{});
    ErrorKB kb(clock);
    testing::TokenChecker checker;
    RepairEngine engine(checker, kb, prompts, clock);
    const auto out = engine.repair(input, session, nullptr, "T.lean");
    const CandidateScore in{checker.check_source(input, "T.lean").error_count, count_sorries(input)};
    const CandidateScore fin{checker.check_source(out.final_source, "T.lean").error_count,
                             count_sorries(out.final_source)};
    if (!(fin <= in)) ++worse;
  }
  return {worse == 0, std::to_string(scenarios - worse) + "/" + std::to_string(scenarios) + " not worse"};
}

// 6. Fixer idempotence over random mutations.
Verdict fixer_idempotence() {
  testing::Rng rng(606);
  const auto files = fixture_sources();
  const std::vector<std::string> noise = {"```lean4", "```", "import Mathlib", "open Real", "#check x",
                                          "#print axioms t", "section S", "end S", "variable (zz : ℕ)",
                                          "def k : \\R \\to \\R := id", "", "/- -/", "end"};
  int stable = 0, trials = 0;
  for (; trials < 600; ++trials) {
    auto views = text::split_lines(files[trials % files.size()]);
    std::vector<std::string> lines(views.begin(), views.end());
    for (int k = 1 + rng.below(5); k > 0; --k) {
      const int op = rng.below(3);
      if (op == 0) {
        lines.insert(lines.begin() + rng.below(static_cast<int>(lines.size()) + 1),
                     noise[rng.below(static_cast<int>(noise.size()))]);
      } else if (op == 1 && !lines.empty()) {
        lines.erase(lines.begin() + rng.below(static_cast<int>(lines.size())));
      } else {
        std::shuffle(lines.begin(), lines.end(), rng.engine());
      }
    }
    const std::string s = text::join_lines(lines, rng.coin());
    const std::string once = apply_rules(s).source;
    if (apply_rules(once).source == once) ++stable;
  }
  const std::string ref = testing::read_file(testing::fixtures_dir() / "lean" / "lasso_reference.lean");
  const auto r = apply_rules(ref);
  const bool ref_ok = r.source == ref && r.applied.empty();
  return {stable == trials && ref_ok, std::to_string(stable) + "/" + std::to_string(trials) +
                                          " idempotent, reference " + (ref_ok ? "unchanged" : "changed")};
}

std::set<std::string> closure_oracle(const std::string& src, const std::set<std::string>& seeds) {
  const auto spans = index_declarations(src);
  std::set<std::string> out = seeds;
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& s : spans) {
      if (s.category == DeclCategory::kPreamble || out.count(s.name)) continue;
      const std::string body(span_text(src, s));
      for (const auto& n : std::set<std::string>(out)) {
        if (references_name(body, n)) {
          out.insert(s.name);
          grew = true;
          break;
        }
      }
    }
  }
  return out;
}

// 7. Harmless soundness and comment-out closure.
Verdict harmless() {
  testing::Rng rng(77);
  const PromptLibrary prompts = testing::shipped_prompts();
  int harmless_n = 0, sound = 0, closures = 0, closure_ok = 0;
  for (const auto& base : fixture_sources()) {
    const auto spans = index_declarations(base);
    int named = 0;
    for (const auto& s : spans) named += s.category != DeclCategory::kPreamble;
    for (const auto& s : spans) {
      if (s.category == DeclCategory::kPreamble || named > 30) continue;
      ++closures;
      if (comment_closure(base, spans, {s.name}) == closure_oracle(base, {s.name})) ++closure_ok;
    }
    for (int trial = 0; trial < 15; ++trial) {
      // Break a few random lines with an unknown identifier.
      auto views = text::split_lines(base);
      std::vector<std::string> lines(views.begin(), views.end());
      for (int k = 1 + rng.below(3); k > 0; --k) {
        auto& l = lines[rng.below(static_cast<int>(lines.size()))];
        if (!text::is_blank(l)) l += " BAD";
      }
      const std::string src = text::join_lines(lines, true);
      auto clock = std::make_shared<VirtualClock>();
      Gateway gw(testing::backend([](const CompletionRequest&) { return testing::fenced("def x := BAD"); }), clock);
      GatewaySession session(gw, "h", GenParams{});
      ErrorKB kb(clock);
      testing::TokenChecker checker;
      RepairEngine engine(checker, kb, prompts, clock);
      Postprocessor post(engine, prompts);
      const auto a = post.harmless_fix(src, session, "T.lean");
      if (!a.harmless) continue;
      ++harmless_n;
      if (checker.check_source(a.source, "T.lean").error_count == 0) ++sound;
    }
  }
  return {harmless_n > 0 && sound == harmless_n && closure_ok == closures,
          std::to_string(sound) + "/" + std::to_string(harmless_n) + " harmless recheck clean, closure " +
              std::to_string(closure_ok) + "/" + std::to_string(closures)};
}

// 8. KB persistence and retrieval determinism.
Verdict kb_roundtrip() {
  testing::TempDir tmp;
  ErrorKB seed(std::make_shared<VirtualClock>());
  seed.import_seed(testing::assets_dir() / "kb", nullptr);
  seed.persist(tmp / "kb.jsonl");
  ErrorKB back;
  std::vector<CorruptLine> bad;
  back.load(tmp / "kb.jsonl", &bad);
  const bool round = seed.size() == 75 && back.snapshot() == seed.snapshot() && bad.empty();

  const std::string q = "type mismatch\n  h\nhas type\n  x = y : Prop";
  const auto first = back.peek(q, 3).ids();
  int same = 0;
  for (int i = 0; i < 1000; ++i) same += back.retrieve(q, 3).ids() == first;

  testing::Rng rng(8);
  const auto corpus = text::split_lines(testing::read_file(testing::assets_dir() / "errors" / "corpus.jsonl"));
  const std::vector<std::string> extra = {"at", "x", "12", "term", "expected", "ℝ", "goal", "failed"};
  int match = 0, queries = 0;
  for (; queries < 60; ++queries) {
    std::string query = nlohmann::json::parse(corpus[rng.below(static_cast<int>(corpus.size()))])
                            .at("message")
                            .get<std::string>();
    for (int k = rng.below(3); k > 0; --k) query += " " + extra[rng.below(static_cast<int>(extra.size()))];
    const ErrorKind qk = normalize_error(query);
    auto all = back.snapshot();
    std::sort(all.begin(), all.end(), [&](const KBEntry& x, const KBEntry& y) {
      auto key = [&](const KBEntry& e) { return std::make_tuple(e.kind == qk, similarity(query, e.message), e.id); };
      return key(x) > key(y);
    });
    std::vector<std::int64_t> brute;
    for (std::size_t i = 0; i < 3; ++i) brute.push_back(all[i].id);
    match += back.peek(query, 3).ids() == brute;
  }
  return {round && same == 1000 && match == queries,
          std::string("round trip ") + (round ? "ok" : "broken") + ", " + std::to_string(same) +
              "/1000 repeat, " + std::to_string(match) + "/" + std::to_string(queries) + " brute force"};
}

// 9. Majority-vote means.
Verdict majority() {
  const PromptLibrary prompts = testing::shipped_prompts();
  auto vote = [&](std::function<std::string(int)> reply) {
    Gateway gw(testing::backend([&](const CompletionRequest& r) { return reply(r.sample); }),
               std::make_shared<VirtualClock>());
    GatewaySession s(gw, "mv", GenParams{});
    ProblemSpec p;
    p.id = "p";
    p.description = "d";
    return majority_vote(p, "def a := 1", {}, s, prompts, 16);
  };
  const std::vector<int> target = {70, 75, 80, 78, 77, 76, 79, 74, 80, 80};
  const auto v769 = vote([&](int s) { return s % 16 < 10 ? std::to_string(target[s % 16]) : std::string("n/a"); });
  const auto v70 = vote([](int) { return std::string("Score: 70"); });
  const auto v80 = vote([](int s) { return s % 16 == 0 ? std::string("???") : std::string("80"); });
  bool inconclusive = false;
  try {
    vote([](int) { return std::string("120"); });
  } catch (const Error& e) {
    inconclusive = e.code() == ErrorCode::kMvInconclusive;
  }
  const bool ok = std::abs(v769.score - 76.9) <= 0.01 && std::abs(v70.score - 70) <= 0.01 &&
                  std::abs(v80.score - 80) <= 0.01 && v80.values.size() == 15 && inconclusive;
  return {ok, fmt("76.9 vector -> %.2f", v769.score) + fmt(", 70 -> %.2f", v70.score) +
                  fmt(", 15x80 -> %.2f", v80.score) + (inconclusive ? ", 120 inconclusive" : ", 120 accepted")};
}

// 10. Stage shares from persisted run records.
Verdict timing() {
  testing::TempDir run;
  const std::vector<StageDurations> per = {{300, 2400, 300, 1000, 300}, {400, 3250, 400, 1250, 400}};
  for (std::size_t i = 0; i < per.size(); ++i) {
    RunRecord r;
    r.problem_id = "p" + std::to_string(i);
    r.class_id = "GD";
    r.durations = per[i];
    testing::write_file(run / r.problem_id / "record.json", run_record_to_json(r));
  }
  std::vector<StageDurations> loaded;
  for (const auto& r : load_run_records(run.path())) loaded.push_back(r.durations);
  const auto t = timing_report(loaded);
  const double bc = t.shares[static_cast<std::size_t>(Stage::kBackboneCorrection)];
  const double pc = t.shares[static_cast<std::size_t>(Stage::kProofCorrection)];
  const double sum = std::accumulate(t.shares.begin(), t.shares.end(), 0.0);
  const bool ok = std::abs(bc - 56.5) <= 0.1 && std::abs(pc - 22.5) <= 0.1 && std::abs(sum - 100) <= 0.1;
  return {ok, fmt("backbone_correction %.2f%%", bc) + fmt(", proof_correction %.2f%%", pc) + fmt(", sum %.2f", sum)};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria = {
      {1, file_rate}, {2, taxonomy},          {3, case_studies}, {4, lasso_trace}, {5, never_worse},
      {6, fixer_idempotence}, {7, harmless}, {8, kb_roundtrip}, {9, majority},    {10, timing}};
  int failed = 0;
  for (const auto& [n, fn] : criteria) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("criterion %d: %s - %s\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str());
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
