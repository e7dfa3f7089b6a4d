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

#ifndef LEANINST_EVALUATOR_HPP_
#define LEANINST_EVALUATOR_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leaninst/lean_driver.hpp"
#include "leaninst/llm_gateway.hpp"
#include "leaninst/postprocessor.hpp"
#include "leaninst/template_store.hpp"

namespace leaninst {

struct FileScore {
  std::string problem_id;
  int def_total = 0, def_ok = 0;
  int thm_total = 0, thm_ok = 0;
  int inst_total = 0, inst_ok = 0;
  bool file_success = false;
  int proof_obligations = 0;
  int proofs_complete = 0;
  int errors = 0;
  int lines = 0;

  int decl_total() const { return def_total + thm_total + inst_total; }
  int decl_ok() const { return def_ok + thm_ok + inst_ok; }
  bool operator==(const FileScore&) const = default;
};

// `commented` lists declarations the postprocessor removed; each counts as a
// failed declaration of its category.
FileScore score_file(std::string_view problem_id, std::string_view src, const CheckReport& report,
                     const std::vector<CommentedDecl>& commented = {});

std::string file_score_to_json(const FileScore& s);
FileScore file_score_from_json(std::string_view text);

// num/den with an undefined value when den is zero.
struct Rate {
  int num = 0;
  int den = 0;
  std::optional<double> value() const {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / den;
  }
};

struct ClassMetrics {
  int files = 0;
  Rate def, thm, inst, file, sc, ps;
  double dm = 0;  // mean definitions per file
  double tm = 0;  // mean theorems per file
  double fl = 0;  // mean line count
};

struct EvalReport {
  std::map<std::string, ClassMetrics> per_class;
  ClassMetrics overall;
  std::map<std::string, double> mv_scores;
};

// Pools declaration counts over files. Throws kMissingProblem for a score
// whose problem is not in the manifest.
EvalReport aggregate(const std::vector<FileScore>& scores, const Manifest& manifest);

std::string eval_report_to_json(const EvalReport& r);
// Terminal table; undefined rates print as n/a.
std::string eval_report_to_text(const EvalReport& r);

struct MajorityVoteResult {
  double score = 0;
  std::vector<int> values;
  int dropped = 0;
  int calls = 0;
};

// First integer in `text`; nullopt when there is none or it lies outside
// [0, 100].
std::optional<int> parse_judge_score(std::string_view text);

// Runs `rounds` judge completions (samples 0..rounds-1). A round whose reply
// does not parse is retried once with sample rounds + i. Throws
// kMvInconclusive when fewer than half the rounds parse.
MajorityVoteResult majority_vote(const ProblemSpec& problem, std::string_view src,
                                 const std::vector<Diagnostic>& diagnostics,
                                 GatewaySession& judge, const PromptLibrary& prompts,
                                 int rounds = 16);

enum class Stage { kGeneration, kBackboneCorrection, kProofGeneration, kProofCorrection, kHarmlessFixing };
inline constexpr std::array<Stage, 5> kAllStages = {Stage::kGeneration, Stage::kBackboneCorrection,
                                                    Stage::kProofGeneration, Stage::kProofCorrection,
                                                    Stage::kHarmlessFixing};
const char* stage_name(Stage s);

using StageDurations = std::array<std::int64_t, 5>;  // milliseconds, indexed by Stage

struct StageTiming {
  StageDurations totals{};
  std::array<double, 5> shares{};  // percent
};

// Throws kEmptyRunSet when no durations are given or all are zero.
StageTiming timing_report(const std::vector<StageDurations>& records);
std::string timing_csv(const StageTiming& t);

}  // namespace leaninst

#endif  // LEANINST_EVALUATOR_HPP_
