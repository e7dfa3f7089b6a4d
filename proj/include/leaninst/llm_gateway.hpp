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

#ifndef LEANINST_LLM_GATEWAY_HPP_
#define LEANINST_LLM_GATEWAY_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leaninst/clock.hpp"

namespace leaninst {

struct GenParams {
  std::string model_name = "deepseek-reasoner";
  double temperature = 0.7;
  int max_tokens = 16000;
  double top_p = 0.9;
  double frequency_penalty = 0.2;

  // Throws kInvalidArgument when a field is out of range.
  void validate() const;
  bool operator==(const GenParams&) const = default;
};

// A prompt body with `{name}` placeholders. `{{` and `}}` render as literal
// braces. Placeholder names are the trimmed text between the braces, so the
// token `{ fix code}` binds to "fix code".
class PromptTemplate {
 public:
  PromptTemplate(std::string id, std::string body);

  const std::string& id() const { return id_; }
  const std::string& body() const { return body_; }
  // Unique names, in order of first appearance.
  const std::vector<std::string>& placeholders() const { return names_; }

  // Single pass over the body; binding values are never rescanned.
  std::string render(const std::map<std::string, std::string>& bindings) const;

 private:
  struct Piece {
    bool is_placeholder = false;
    std::string text;  // literal text, or the placeholder name
  };
  std::string id_;
  std::string body_;
  std::vector<Piece> pieces_;
  std::vector<std::string> names_;
};

// Prompt ids shipped under assets/prompts.
namespace prompt_ids {
inline constexpr std::string_view kBackbone = "backbone";
inline constexpr std::string_view kProofGeneration = "proof_generation";
inline constexpr std::string_view kCorrectionHead = "error_correction_head";
inline constexpr std::string_view kCorrectionError = "error_correction_error";
inline constexpr std::string_view kCorrectionSolutions = "error_correction_solutions";
inline constexpr std::string_view kCorrectionTheorems = "error_correction_theorems";
inline constexpr std::string_view kCorrectionTail = "error_correction_tail";
inline constexpr std::string_view kFixExplanation = "fix_explanation";
inline constexpr std::string_view kMajorityVoting = "majority_voting";
inline constexpr std::string_view kBacktranslation = "backtranslation";
inline constexpr std::string_view kHarmlessRewrite = "harmless_rewrite";
}  // namespace prompt_ids

class PromptLibrary {
 public:
  PromptLibrary() = default;
  // Loads every `<id>.txt` in `dir`, byte for byte.
  static PromptLibrary load_dir(const std::filesystem::path& dir);

  void add(PromptTemplate tmpl);
  bool contains(std::string_view id) const;
  const PromptTemplate& get(std::string_view id) const;  // kUnknownTemplate
  std::string render(std::string_view id,
                     const std::map<std::string, std::string>& bindings) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

enum class BackendKind { kLive, kReplay, kScripted };
const char* backend_kind_name(BackendKind kind);
BackendKind parse_backend_kind(std::string_view name);

struct Transcript {
  std::string request_id;
  std::string prompt_hash;
  std::string prompt;
  std::string completion;
  GenParams params;
  std::string timestamp;
  BackendKind backend = BackendKind::kScripted;
  // Distinguishes repeated samples of one prompt (majority-vote rounds,
  // regeneration attempts). Part of the replay key.
  int sample = 0;
};

std::string transcript_to_json_line(const Transcript& t);
Transcript transcript_from_json_line(std::string_view line);

struct CompletionRequest {
  std::string_view prompt;
  const GenParams* params = nullptr;
  int sample = 0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual BackendKind kind() const = 0;
};

// Answers from a recorded transcript corpus keyed by (prompt_hash, sample).
// A miss raises kReplayMiss; there is no live fallthrough.
class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(const std::vector<Transcript>& corpus);
  static std::shared_ptr<ReplayBackend> from_file(const std::filesystem::path& jsonl);

  std::string complete(const CompletionRequest& request) override;
  BackendKind kind() const override { return BackendKind::kReplay; }
  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::pair<std::string, int>, std::string> table_;
};

// Fixture-driven backend. A fixture is a JSON object with a "rules" array;
// the first rule whose matchers all hold answers the request:
//
//   {"contains": ["Problem description", "Lasso"],   // all substrings present
//    "prompt_sha256": "...",                         // optional exact match
//    "completions": ["first sample", "second"],      // indexed by sample mod n
//    "echo": false,                                  // reply with the prompt
//    "error": "unavailable" | "timeout" | "panic"}   // raise instead
class ScriptedBackend final : public Backend {
 public:
  struct Rule {
    std::vector<std::string> contains;
    std::vector<std::string> excludes;
    std::optional<std::string> prompt_sha256;
    std::vector<std::string> completions;
    bool echo = false;
    std::optional<std::string> error;
  };

  explicit ScriptedBackend(std::vector<Rule> rules);
  static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& json);
  static std::shared_ptr<ScriptedBackend> from_json_text(std::string_view json);

  std::string complete(const CompletionRequest& request) override;
  BackendKind kind() const override { return BackendKind::kScripted; }

 private:
  std::vector<Rule> rules_;
};

// In-process backend for tests and embedding.
class FunctionBackend final : public Backend {
 public:
  using Fn = std::function<std::string(const CompletionRequest&)>;
  explicit FunctionBackend(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(const CompletionRequest& request) override { return fn_(request); }
  BackendKind kind() const override { return BackendKind::kScripted; }

 private:
  Fn fn_;
};

struct LiveBackendOptions {
  std::string base_url;  // e.g. https://api.deepseek.com/v1
  std::string api_key;
  std::optional<std::string> model_override;
  double timeout_seconds = 600;
  int retries = 1;
  double backoff_seconds = 2.0;  // doubled on each retry
};

// OpenAI-compatible chat-completion endpoint over HTTP(S).
class LiveBackend final : public Backend {
 public:
  explicit LiveBackend(LiveBackendOptions options);
  // Reads LEANINST_LLM_BASE_URL, LEANINST_LLM_API_KEY, LEANINST_LLM_MODEL.
  static LiveBackendOptions options_from_env();

  std::string complete(const CompletionRequest& request) override;
  BackendKind kind() const override { return BackendKind::kLive; }

 private:
  LiveBackendOptions options_;
};

struct Completion {
  std::string text;
  std::string request_id;
};

// Records every exchange; shareable across workers.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, std::shared_ptr<Clock> clock,
          std::optional<std::filesystem::path> transcript_log = std::nullopt);

  Completion complete(std::string_view prompt, const GenParams& params, int sample,
                      std::string request_id);

  // Wall-clock ceiling per call; exceeding it raises kTimeout.
  void set_timeout_seconds(double seconds) { timeout_seconds_ = seconds; }
  std::vector<Transcript> transcripts() const;
  std::size_t call_count() const;
  BackendKind backend_kind() const { return backend_->kind(); }
  Clock& clock() { return *clock_; }

 private:
  std::shared_ptr<Backend> backend_;
  std::shared_ptr<Clock> clock_;
  std::optional<std::filesystem::path> log_path_;
  double timeout_seconds_ = 0;  // 0 = unlimited
  mutable std::mutex mu_;
  std::vector<Transcript> log_;
  std::ofstream log_file_;
};

// A per-problem view of a gateway: request ids are `<scope>/<n>` so that runs
// are deterministic regardless of worker interleaving.
class GatewaySession {
 public:
  GatewaySession(Gateway& gateway, std::string scope, GenParams params)
      : gateway_(gateway), scope_(std::move(scope)), params_(std::move(params)) {}

  Completion complete(std::string_view prompt, int sample = 0);
  Completion complete(std::string_view prompt, const GenParams& params, int sample);

  const GenParams& params() const { return params_; }
  std::size_t call_count() const;
  std::vector<std::string> request_ids() const;
  // Continue numbering after a resumed run.
  void set_next_index(std::size_t n);

 private:
  Gateway& gateway_;
  std::string scope_;
  GenParams params_;
  mutable std::mutex mu_;
  std::size_t next_ = 0;
  std::vector<std::string> ids_;
};

// Contents of the last ```lean / ```lean4 block; else the last unlabeled
// block; else the whole completion with fence lines dropped. Result is
// trimmed. Throws kEmptyCompletion when nothing remains.
std::string extract_code_block(std::string_view completion);

}  // namespace leaninst

#endif  // LEANINST_LLM_GATEWAY_HPP_
