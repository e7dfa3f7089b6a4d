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

#ifndef LEANINST_ERROR_KB_HPP_
#define LEANINST_ERROR_KB_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "leaninst/clock.hpp"
#include "leaninst/lean_driver.hpp"
#include "leaninst/llm_gateway.hpp"

namespace leaninst {

struct Explanation {
  std::string error_type;
  std::string root_cause;
  std::string fix_description;
  std::string why_it_works;
  bool operator==(const Explanation&) const = default;
};

struct KBEntry {
  std::int64_t id = 0;
  ErrorKind kind = ErrorKind::kUnclassified;
  std::string message;
  std::string faulty_snippet;
  std::string fixed_snippet;
  Explanation explanation;
  std::string created_at;
  std::int64_t use_count = 0;
  // Set on shipped seed entries: "curated" or "synthesized".
  std::optional<std::string> origin;
  bool operator==(const KBEntry&) const = default;
};

std::string kb_entry_to_json_line(const KBEntry& e);
KBEntry kb_entry_from_json_line(std::string_view line);  // throws kSchemaViolation

// Lowercase ASCII alphanumeric runs; numerals become <n>, single letters <v>.
std::set<std::string> masked_tokens(std::string_view message);
// Jaccard index of the masked token sets; two empty sets give 1.0.
double similarity(std::string_view a, std::string_view b);

// Parses the four labelled sections; nullopt unless all four are nonempty.
std::optional<Explanation> parse_explanation(std::string_view completion);

struct ScoredEntry {
  KBEntry entry;
  double score = 0;
};

struct RetrievalResult {
  std::vector<ScoredEntry> entries;
  std::vector<std::int64_t> ids() const;
};

struct CorruptLine {
  int line_no = 0;
  std::string reason;
};

// Ordering key: same kind as the query first, then similarity, then newer id.
// Reported score is 0.5 * [same kind] + 0.5 * similarity, so scores never
// increase down the list.
class ErrorKB {
 public:
  explicit ErrorKB(std::shared_ptr<Clock> clock = std::make_shared<SystemClock>());

  // Replaces the contents. A missing file gives an empty KB. Bad lines are
  // skipped and reported.
  void load(const std::filesystem::path& path, std::vector<CorruptLine>* corrupt);
  void persist(const std::filesystem::path& path) const;
  // record_fix and import_seed append to this file as they go.
  void attach(const std::filesystem::path& path);

  RetrievalResult retrieve(std::string_view message, std::size_t k);
  // Same ranking without touching use_count.
  RetrievalResult peek(std::string_view message, std::size_t k) const;

  // Stores `e` under the next id and returns the stored copy.
  KBEntry add(KBEntry e);

  // Asks the model to explain the fix and stores the result. An explanation
  // missing any section is kept with the raw completion as fix_description
  // and "unparsed" elsewhere.
  KBEntry record_fix(std::string_view message, std::string_view faulty, std::string_view fixed,
                     GatewaySession& session, const PromptLibrary& prompts);

  // Imports every *.jsonl file in `dir` in name order; ids are reassigned.
  std::size_t import_seed(const std::filesystem::path& dir, std::vector<CorruptLine>* corrupt);

  std::vector<KBEntry> snapshot() const;
  std::optional<KBEntry> get(std::int64_t id) const;
  std::size_t size() const;
  std::map<ErrorKind, int> histogram() const;

 private:
  RetrievalResult rank(std::string_view message, std::size_t k) const;
  void append_locked(const KBEntry& e);

  std::shared_ptr<Clock> clock_;
  mutable std::mutex mu_;
  std::vector<KBEntry> entries_;
  std::int64_t next_id_ = 1;
  std::optional<std::filesystem::path> attached_;
};

}  // namespace leaninst

#endif  // LEANINST_ERROR_KB_HPP_
