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

#include <doctest.h>

#include <numeric>

#include "leaninst/error.hpp"
#include "leaninst/evaluator.hpp"
#include "leaninst/template_store.hpp"
#include "support.hpp"

using namespace leaninst;
using testing::TokenChecker;

namespace {

Manifest manifest_of(const std::vector<std::pair<std::string, std::string>>& ids) {
  std::string jsonl;
  for (const auto& [id, cls] : ids) {
    ProblemSpec p;
    p.id = id;
    p.class_id = cls;
    p.title = id;
    p.description = "d";
    p.template_ref = cls;
    p.example_ref = "e";
    jsonl += problem_to_json_line(p) + "\n";
  }
  return parse_manifest(jsonl, ClassRegistry::defaults());
}

FileScore score(std::string id, int dt, int dok, int tt, int tok, int it, int iok, bool ok, int po = 0,
                int pc = 0) {
  FileScore s;
  s.problem_id = std::move(id);
  s.def_total = dt;
  s.def_ok = dok;
  s.thm_total = tt;
  s.thm_ok = tok;
  s.inst_total = it;
  s.inst_ok = iok;
  s.file_success = ok;
  s.proof_obligations = po;
  s.proofs_complete = pc;
  return s;
}

MajorityVoteResult vote(std::function<std::string(int)> by_sample, int rounds = 16) {
  Gateway gw(testing::backend([&](const CompletionRequest& r) { return by_sample(r.sample); }),
             std::make_shared<VirtualClock>());
  GatewaySession s(gw, "mv", GenParams{});
  ProblemSpec p;
  p.id = "p";
  p.description = "minimize f";
  return majority_vote(p, "def a := 1", {}, s, testing::shipped_prompts(), rounds);
}

}  // namespace

TEST_SUITE("evaluator") {

TEST_CASE("declaration counts and file success") {
  std::string src;
  for (int i = 0; i < 4; ++i) src += "def d" + std::to_string(i) + " : Nat := 1\n";
  for (int i = 0; i < 7; ++i) {
    src += "theorem t" + std::to_string(i) + " : True := " + (i == 3 ? "BAD" : "trivial") + "\n";
  }
  TokenChecker ck;
  const auto s = score_file("p", src, ck.check_source(src, "T.lean"));
  CHECK(s.def_total == 4);
  CHECK(s.def_ok == 4);
  CHECK(s.thm_total == 7);
  CHECK(s.thm_ok == 6);
  CHECK_FALSE(s.file_success);
}

TEST_CASE("wavelet file counts obligations and complete proofs") {
  const std::string src = testing::read_file(testing::fixtures_dir() / "lean" / "wavelet.lean");
  const auto report = build_report(src, "", "wavelet.lean");
  const auto s = score_file("wavelet", src, report);
  // Brute force: spans with a proof body, and those without a sorry.
  int obligations = 0, complete = 0;
  for (const auto& d : index_declarations(src)) {
    if (d.category == DeclCategory::kPreamble || d.category == DeclCategory::kDefinition) continue;
    if (!d.body_is_proof) continue;
    ++obligations;
    if (scan_sorries(span_text(src, d)).empty()) ++complete;
  }
  CHECK(obligations == 9);
  CHECK(complete == 7);
  CHECK(s.proof_obligations == obligations);
  CHECK(s.proofs_complete == complete);
  CHECK(s.file_success);
  CHECK(s.def_ok == s.def_total);
}

TEST_CASE("an empty file is never a success") {
  const auto s = score_file("e", "", build_report("", "", "e.lean"));
  CHECK(s.decl_total() == 0);
  CHECK_FALSE(s.file_success);
}

TEST_CASE("a sorry in a definition blocks success") {
  const std::string src =
      "def f : Nat := sorry\ntheorem t : True := trivial\ninstance i : Inhabited Nat := ⟨0⟩\n";
  const auto s = score_file("p", src, build_report(src, "", "p.lean"));
  CHECK(s.def_ok == 0);
  CHECK_FALSE(s.file_success);
}

TEST_CASE("commented declarations count as failures") {
  const std::string src = "def a : Nat := 1\ntheorem t : True := trivial\ninstance i : Inhabited Nat := ⟨0⟩\n";
  const auto clean = score_file("p", src, build_report(src, "", "p.lean"));
  CHECK(clean.file_success);
  const auto s = score_file("p", src, build_report(src, "", "p.lean"), {{"gone", DeclCategory::kDefinition}});
  CHECK(s.def_total == 2);
  CHECK(s.def_ok == 1);
  CHECK_FALSE(s.file_success);
  CHECK(file_score_from_json(file_score_to_json(s)) == s);
}

TEST_CASE("file rate over 42 files") {
  std::vector<std::pair<std::string, std::string>> ids;
  std::vector<FileScore> scores;
  for (int i = 0; i < 42; ++i) {
    ids.emplace_back("p" + std::to_string(i), "GD");
    scores.push_back(score("p" + std::to_string(i), 1, 1, 1, 1, 1, 1, i < 24));
  }
  const auto r = aggregate(scores, manifest_of(ids));
  REQUIRE(r.overall.file.value().has_value());
  CHECK(*r.overall.file.value() * 100 == doctest::Approx(57.14).epsilon(0.0001));
}

TEST_CASE("syntactic correctness over failed files") {
  const auto m = manifest_of({{"a", "PGM"}});
  const auto r = aggregate({score("a", 4, 4, 5, 4, 1, 1, false)}, m);
  CHECK(r.overall.sc.num == 9);
  CHECK(r.overall.sc.den == 10);
  CHECK(*r.overall.sc.value() == doctest::Approx(0.9));
  CHECK_FALSE(r.overall.ps.value().has_value());
}

TEST_CASE("no failed files leaves SC undefined") {
  const auto m = manifest_of({{"a", "PGM"}});
  const auto r = aggregate({score("a", 1, 1, 1, 1, 1, 1, true, 3, 2)}, m);
  CHECK_FALSE(r.overall.sc.value().has_value());
  CHECK(*r.overall.ps.value() == doctest::Approx(2.0 / 3.0));
  CHECK(eval_report_to_text(r).find("n/a") != std::string::npos);
  CHECK(eval_report_to_json(r).find("null") != std::string::npos);
}

TEST_CASE("unknown problems are rejected") {
  try {
    aggregate({score("ghost", 1, 1, 1, 1, 1, 1, true)}, manifest_of({{"a", "GD"}}));
    FAIL("expected MissingProblem");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingProblem);
  }
}

TEST_CASE("pooled rates stay within class bounds") {
  testing::Rng rng(21);
  const std::vector<std::string> classes = {"GD", "PGM", "Nesterov", "BCD", "ADMM"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::pair<std::string, std::string>> ids;
    std::vector<FileScore> scores;
    const int n = 1 + rng.below(20);
    for (int i = 0; i < n; ++i) {
      const std::string id = "p" + std::to_string(i);
      ids.emplace_back(id, classes[rng.below(5)]);
      const int dt = rng.below(5), tt = rng.below(5), it = rng.below(3);
      const int po = rng.below(6);
      scores.push_back(score(id, dt, rng.below(dt + 1), tt, rng.below(tt + 1), it, rng.below(it + 1),
                             rng.coin(), po, rng.below(po + 1)));
    }
    const auto r = aggregate(scores, manifest_of(ids));
    auto check_rate = [&](Rate ClassMetrics::*field) {
      double lo = 2, hi = -1;
      for (const auto& [cls, cm] : r.per_class) {
        if (auto v = (cm.*field).value()) {
          lo = std::min(lo, *v);
          hi = std::max(hi, *v);
        }
      }
      if (auto v = (r.overall.*field).value()) {
        CHECK(*v >= 0.0);
        CHECK(*v <= 1.0);
        CHECK(*v >= lo - 1e-12);
        CHECK(*v <= hi + 1e-12);
      }
    };
    for (auto f : {&ClassMetrics::def, &ClassMetrics::thm, &ClassMetrics::inst, &ClassMetrics::file,
                   &ClassMetrics::sc, &ClassMetrics::ps}) {
      check_rate(f);
    }
    int files = 0;
    for (const auto& [cls, cm] : r.per_class) files += cm.files;
    CHECK(files == n);
  }
}

TEST_CASE("judge score parsing") {
  CHECK(parse_judge_score("Score: 85") == 85);
  CHECK(parse_judge_score("  0") == 0);
  CHECK_FALSE(parse_judge_score("120").has_value());
  CHECK_FALSE(parse_judge_score("no digits").has_value());
}

TEST_CASE("majority vote examples") {
  auto constant = vote([](int) { return std::string("70"); });
  CHECK(constant.score == doctest::Approx(70.0));
  CHECK(constant.calls == 16);

  auto one_bad = vote([](int s) { return s == 3 || s == 16 + 3 ? std::string("no idea") : std::string("80"); });
  CHECK(one_bad.score == doctest::Approx(80.0));
  CHECK(one_bad.values.size() == 15);
  CHECK(one_bad.dropped == 1);
  CHECK(one_bad.calls == 17);

  try {
    vote([](int) { return std::string("120"); });
    FAIL("expected MvInconclusive");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMvInconclusive);
  }
}

TEST_CASE("a fractional mean from integer rounds") {
  // Ten valid rounds summing to 769; six rounds stay invalid after retry.
  const std::vector<int> valid = {70, 75, 80, 78, 77, 76, 79, 74, 80, 80};
  REQUIRE(std::accumulate(valid.begin(), valid.end(), 0) == 769);
  const auto r = vote([&](int s) {
    const int round = s % 16;
    return round < 10 ? std::to_string(valid[round]) : std::string("unsure");
  });
  CHECK(r.score == doctest::Approx(76.9));
  CHECK(r.dropped == 6);
  CHECK(r.values.size() == 10);
}

TEST_CASE("stage shares") {
  const StageDurations d = {70, 565, 70, 225, 70};
  const auto t = timing_report({d});
  const std::array<double, 5> expect = {7, 56.5, 7, 22.5, 7};
  double sum = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(t.shares[i] == doctest::Approx(expect[i]));
    sum += t.shares[i];
  }
  CHECK(sum == doctest::Approx(100.0).epsilon(0.001));
  CHECK(timing_csv(t).find("backbone_correction") != std::string::npos);

  const auto single = timing_report({{0, 0, 5, 0, 0}});
  CHECK(single.shares[2] == doctest::Approx(100.0));

  for (const std::vector<StageDurations>& bad :
       {std::vector<StageDurations>{}, std::vector<StageDurations>{{0, 0, 0, 0, 0}}}) {
    try {
      timing_report(bad);
      FAIL("expected EmptyRunSet");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kEmptyRunSet);
    }
  }
}

}  // TEST_SUITE
