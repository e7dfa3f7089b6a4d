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

#ifndef LEANINST_PIPELINE_HPP_
#define LEANINST_PIPELINE_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leaninst/evaluator.hpp"
#include "leaninst/llm_gateway.hpp"
#include "leaninst/postprocessor.hpp"

namespace leaninst {

enum class CheckerMode { kReal, kMock };
enum class ClockMode { kSystem, kVirtual };

// Plain `key = value` lines; `#` starts a comment. Relative paths resolve
// against the config file's directory. Every key can be overridden by the
// environment variable LEANINST_<KEY> (upper case), which is also where API
// credentials belong.
struct RunConfig {
  std::filesystem::path manifest;
  std::filesystem::path templates_dir;
  std::filesystem::path examples_dir;
  std::filesystem::path prompts_dir;
  std::filesystem::path kb_path;
  std::filesystem::path run_dir;

  BackendKind backend = BackendKind::kScripted;
  std::filesystem::path backend_fixture;  // scripted rules or replay corpus
  std::optional<BackendKind> judge_backend;  // unset: no majority vote
  std::filesystem::path judge_fixture;
  int mv_rounds = 16;
  GenParams gen;
  GenParams judge_params;
  double gateway_timeout_seconds = 0;

  int backbone_attempts = 3;
  int proof_attempts = 3;
  int correction_steps = 3;
  int final_fix_attempts = 2;
  int retrieval_k = 3;

  CheckerMode checker = CheckerMode::kMock;
  std::filesystem::path mock_fixtures;
  std::filesystem::path lean_workspace;
  double checker_timeout_seconds = 300;

  int workers = 1;
  ClockMode clock = ClockMode::kSystem;
  // Persist entries learned during the run back into kb_path.
  bool kb_write_back = true;

  void validate() const;  // kConfig
};

// Throws kConfig on unknown keys or bad values.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                       bool apply_env = true);
RunConfig load_config(const std::filesystem::path& path, bool apply_env = true);
// Applies one `key = value` setting on top of an existing config.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value,
                      const std::filesystem::path& base_dir);

struct RunRecord {
  std::string problem_id;
  std::string class_id;
  std::string status = "pending";  // pending | complete | failed
  std::string error;
  std::vector<std::string> completed_stages;
  std::map<std::string, std::string> outputs;  // step -> file name in the problem dir
  StageDurations durations{};
  std::map<std::string, int> attempts;
  std::vector<std::string> transcript_ids;
  std::vector<std::string> files;
  int gateway_calls = 0;
  bool harmless = false;
  bool fully_proved = false;
  int harmless_phase = 0;
  std::vector<CommentedDecl> commented;
  bool backtranslation_count_ok = false;
  std::optional<FileScore> score;
  std::optional<double> mv_score;

  bool done(std::string_view step) const;
};

std::string run_record_to_json(const RunRecord& r);
RunRecord run_record_from_json(std::string_view text);

// Pipeline steps, in order. The first five carry the stage timings.
namespace steps {
inline constexpr std::string_view kGeneration = "generation";
inline constexpr std::string_view kBackbone = "backbone_correction";
inline constexpr std::string_view kProofs = "proof_refinement";
inline constexpr std::string_view kHarmless = "harmless_fixing";
inline constexpr std::string_view kBacktranslation = "backtranslation";
inline constexpr std::string_view kScoring = "scoring";
inline constexpr std::string_view kMajorityVote = "majority_vote";
}  // namespace steps

struct RunSummary {
  std::vector<RunRecord> records;
  int failed = 0;
  std::vector<std::string> warnings;
};

// Comma-separated problem ids or class ids; empty selects everything.
std::vector<const ProblemSpec*> select_problems(const Manifest& m, std::string_view filter);

// Runs every selected problem. Completed steps recorded in an existing run
// dir are skipped. Config and asset errors throw; per-problem failures are
// recorded and counted.
RunSummary run_pipeline(const RunConfig& cfg, std::string_view filter);

// Scores recorded under `run_dir`. Throws kNotFound with "no runs found" when
// the directory holds no scored record.
EvalReport evaluate_run_dir(const std::filesystem::path& run_dir);
std::vector<RunRecord> load_run_records(const std::filesystem::path& run_dir);

struct ReportFiles {
  std::string json;
  std::string text;
  std::string timing_csv;
};
// Writes report.json, report.txt and timing.csv into `run_dir`.
ReportFiles write_report(const std::filesystem::path& run_dir);

}  // namespace leaninst

#endif  // LEANINST_PIPELINE_HPP_
