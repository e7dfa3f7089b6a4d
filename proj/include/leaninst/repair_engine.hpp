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

#ifndef LEANINST_REPAIR_ENGINE_HPP_
#define LEANINST_REPAIR_ENGINE_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leaninst/clock.hpp"
#include "leaninst/error_kb.hpp"
#include "leaninst/lean_driver.hpp"
#include "leaninst/llm_gateway.hpp"
#include "leaninst/template_store.hpp"

namespace leaninst {

struct RepairLimits {
  int max_correction_steps = 3;
  int max_proof_attempts = 3;
  std::size_t retrieval_k = 3;
  int context_radius = 8;
};

struct IterationLog {
  int errors_before = 0;
  int errors_after = 0;
  int sorries_after = 0;
  std::vector<std::string> rule_ids;
  std::vector<std::int64_t> kb_hits;
  std::string transcript;
};

struct RepairOutcome {
  std::string final_source;
  int iterations_used = 0;
  bool resolved = false;
  std::vector<IterationLog> per_iteration;
  std::string best_candidate;
  int input_errors = 0;
  int input_sorries = 0;
  int final_errors = 0;
  int final_sorries = 0;
  std::optional<std::int64_t> kb_entry;
  // Set when a gateway failure ended the loop early.
  std::optional<std::string> gateway_error;
  int checker_calls = 0;
};

struct ProofOutcome {
  std::string source;
  int unresolved_sorries = 0;
  int attempts = 0;
  bool improved = false;
  std::int64_t generation_ms = 0;
  std::int64_t correction_ms = 0;
  std::vector<RepairOutcome> repairs;
  std::optional<std::string> gateway_error;
};

// (errors, sorries) lexicographic.
struct CandidateScore {
  int errors = 0;
  int sorries = 0;
  bool operator<(const CandidateScore& o) const {
    return errors != o.errors ? errors < o.errors : sorries < o.sorries;
  }
  bool operator<=(const CandidateScore& o) const { return !(o < *this); }
};

int count_sorries(std::string_view src);

class RepairEngine {
 public:
  // Called with (iteration, candidate source) for every candidate produced.
  using CandidateSink = std::function<void(int, const std::string&)>;

  RepairEngine(Checker& checker, ErrorKB& kb, const PromptLibrary& prompts,
               std::shared_ptr<Clock> clock, RepairLimits limits = {});

  // Checker call that turns a checker timeout into a timeout diagnostic.
  CheckReport check(std::string_view src, std::string_view label);

  // The correction prompt for `report`'s errors. `kb_hits` receives the ids of
  // retrieved entries.
  std::string build_correction_prompt(std::string_view src, const CheckReport& report,
                                      const Template* tmpl, std::string_view label,
                                      std::vector<std::int64_t>* kb_hits);

  std::string fix_once(std::string_view src, const CheckReport& report, GatewaySession& session,
                       const Template* tmpl, std::string_view label,
                       std::vector<std::int64_t>* kb_hits = nullptr,
                       std::string* transcript = nullptr);

  RepairOutcome repair(std::string_view src, GatewaySession& session, const Template* tmpl,
                       std::string_view label, const CandidateSink& sink = {});

  // Whole-file proof generation followed by repair; a candidate is kept only
  // if it compiles and has fewer sorries than the current best.
  ProofOutcome refine_proofs(std::string_view src, GatewaySession& session, const Template& tmpl,
                             std::string_view label, const CandidateSink& sink = {});

  const RepairLimits& limits() const { return limits_; }

 private:
  Checker& checker_;
  ErrorKB& kb_;
  const PromptLibrary& prompts_;
  std::shared_ptr<Clock> clock_;
  RepairLimits limits_;
};

}  // namespace leaninst

#endif  // LEANINST_REPAIR_ENGINE_HPP_
