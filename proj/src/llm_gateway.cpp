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

#include "leaninst/llm_gateway.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include <json.hpp>

#include "leaninst/digest.hpp"
#include "leaninst/error.hpp"
#include "leaninst/text.hpp"

namespace leaninst {

using json = nlohmann::json;

void GenParams::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    fail(ErrorCode::kInvalidArgument, "temperature must lie in [0, 2]");
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "top_p must lie in (0, 1]");
  }
  if (max_tokens <= 0) fail(ErrorCode::kInvalidArgument, "max_tokens must be positive");
  if (model_name.empty()) fail(ErrorCode::kInvalidArgument, "model_name is empty");
}

namespace {

json params_to_json(const GenParams& p) {
  return json{{"model_name", p.model_name},
              {"temperature", p.temperature},
              {"max_tokens", p.max_tokens},
              {"top_p", p.top_p},
              {"frequency_penalty", p.frequency_penalty}};
}

GenParams params_from_json(const json& j) {
  GenParams p;
  p.model_name = j.at("model_name").get<std::string>();
  p.temperature = j.at("temperature").get<double>();
  p.max_tokens = j.at("max_tokens").get<int>();
  p.top_p = j.at("top_p").get<double>();
  p.frequency_penalty = j.at("frequency_penalty").get<double>();
  return p;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string id, std::string body)
    : id_(std::move(id)), body_(std::move(body)) {
  std::string literal;
  std::size_t i = 0;
  while (i < body_.size()) {
    const char c = body_[i];
    if ((c == '{' || c == '}') && i + 1 < body_.size() && body_[i + 1] == c) {
      literal += c;
      i += 2;
      continue;
    }
    if (c == '{') {
      const std::size_t close = body_.find_first_of("{}\n", i + 1);
      if (close != std::string::npos && body_[close] == '}') {
        const std::string name(text::trim(std::string_view(body_).substr(i + 1, close - i - 1)));
        if (!name.empty()) {
          if (!literal.empty()) pieces_.push_back({false, std::move(literal)});
          literal.clear();
          pieces_.push_back({true, name});
          if (std::find(names_.begin(), names_.end(), name) == names_.end()) {
            names_.push_back(name);
          }
          i = close + 1;
          continue;
        }
      }
    }
    literal += c;
    ++i;
  }
  if (!literal.empty()) pieces_.push_back({false, std::move(literal)});
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& bindings) const {
  for (const auto& name : names_) {
    if (!bindings.count(name)) {
      fail(ErrorCode::kMissingBinding, "template '" + id_ + "' missing binding: " + name);
    }
  }
  std::string out;
  for (const auto& piece : pieces_) {
    out += piece.is_placeholder ? bindings.at(piece.text) : piece.text;
  }
  return out;
}

PromptLibrary PromptLibrary::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    fail(ErrorCode::kMissingAsset, "prompt directory not found: " + dir.string());
  }
  PromptLibrary lib;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    lib.add(PromptTemplate(entry.path().stem().string(), ss.str()));
  }
  return lib;
}

void PromptLibrary::add(PromptTemplate tmpl) {
  std::string id = tmpl.id();
  templates_.insert_or_assign(std::move(id), std::move(tmpl));
}

bool PromptLibrary::contains(std::string_view id) const {
  return templates_.find(id) != templates_.end();
}

const PromptTemplate& PromptLibrary::get(std::string_view id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) {
    fail(ErrorCode::kUnknownTemplate, "unknown prompt template: " + std::string(id));
  }
  return it->second;
}

std::string PromptLibrary::render(std::string_view id,
                                  const std::map<std::string, std::string>& bindings) const {
  return get(id).render(bindings);
}

std::vector<std::string> PromptLibrary::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : templates_) out.push_back(id);
  return out;
}

const char* backend_kind_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::kLive:
      return "live";
    case BackendKind::kReplay:
      return "replay";
    case BackendKind::kScripted:
      return "scripted";
  }
  return "scripted";
}

BackendKind parse_backend_kind(std::string_view name) {
  if (name == "live") return BackendKind::kLive;
  if (name == "replay") return BackendKind::kReplay;
  if (name == "scripted") return BackendKind::kScripted;
  fail(ErrorCode::kConfig, "unknown backend mode: " + std::string(name));
}

std::string transcript_to_json_line(const Transcript& t) {
  json j{{"request_id", t.request_id},
         {"prompt_hash", t.prompt_hash},
         {"prompt", t.prompt},
         {"completion", t.completion},
         {"params", params_to_json(t.params)},
         {"timestamp", t.timestamp},
         {"backend", backend_kind_name(t.backend)},
         {"sample", t.sample}};
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

Transcript transcript_from_json_line(std::string_view line) {
  const json j = json::parse(line);
  Transcript t;
  t.request_id = j.at("request_id").get<std::string>();
  t.prompt_hash = j.at("prompt_hash").get<std::string>();
  t.prompt = j.at("prompt").get<std::string>();
  t.completion = j.at("completion").get<std::string>();
  t.params = params_from_json(j.at("params"));
  t.timestamp = j.at("timestamp").get<std::string>();
  t.backend = parse_backend_kind(j.at("backend").get<std::string>());
  t.sample = j.value("sample", 0);
  return t;
}

ReplayBackend::ReplayBackend(const std::vector<Transcript>& corpus) {
  for (const auto& t : corpus) table_.emplace(std::make_pair(t.prompt_hash, t.sample), t.completion);
}

std::shared_ptr<ReplayBackend> ReplayBackend::from_file(const std::filesystem::path& jsonl) {
  std::ifstream in(jsonl, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open transcript corpus: " + jsonl.string());
  std::vector<Transcript> corpus;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    try {
      corpus.push_back(transcript_from_json_line(line));
    } catch (const json::exception& e) {
      fail(ErrorCode::kSchemaViolation,
           jsonl.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return std::make_shared<ReplayBackend>(corpus);
}

std::string ReplayBackend::complete(const CompletionRequest& request) {
  const std::string hash = sha256_hex(request.prompt);
  auto it = table_.find({hash, request.sample});
  if (it == table_.end()) {
    throw GatewayError(ErrorCode::kReplayMiss, "no recorded completion for prompt " + hash +
                                                   " sample " + std::to_string(request.sample));
  }
  return it->second;
}

ScriptedBackend::ScriptedBackend(std::vector<Rule> rules) : rules_(std::move(rules)) {}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_json_text(std::string_view text) {
  const json j = json::parse(text);
  std::vector<Rule> rules;
  for (const auto& r : j.at("rules")) {
    Rule rule;
    if (r.contains("contains")) {
      if (r["contains"].is_string()) {
        rule.contains.push_back(r["contains"].get<std::string>());
      } else {
        rule.contains = r["contains"].get<std::vector<std::string>>();
      }
    }
    if (r.contains("excludes")) rule.excludes = r["excludes"].get<std::vector<std::string>>();
    if (r.contains("prompt_sha256")) rule.prompt_sha256 = r["prompt_sha256"].get<std::string>();
    if (r.contains("completion")) rule.completions.push_back(r["completion"].get<std::string>());
    if (r.contains("completions")) {
      for (const auto& c : r["completions"]) rule.completions.push_back(c.get<std::string>());
    }
    rule.echo = r.value("echo", false);
    if (r.contains("error")) rule.error = r["error"].get<std::string>();
    if (rule.completions.empty() && !rule.echo && !rule.error) {
      fail(ErrorCode::kSchemaViolation, "scripted rule has no completion, echo or error");
    }
    rules.push_back(std::move(rule));
  }
  return std::make_shared<ScriptedBackend>(std::move(rules));
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open scripted fixture: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_json_text(ss.str());
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchemaViolation, path.string() + ": " + e.what());
  }
}

std::string ScriptedBackend::complete(const CompletionRequest& request) {
  const std::string_view prompt = request.prompt;
  for (const auto& rule : rules_) {
    bool match = std::all_of(rule.contains.begin(), rule.contains.end(), [&](const auto& s) {
      return prompt.find(s) != std::string_view::npos;
    });
    match = match && std::none_of(rule.excludes.begin(), rule.excludes.end(), [&](const auto& s) {
              return prompt.find(s) != std::string_view::npos;
            });
    if (match && rule.prompt_sha256) match = *rule.prompt_sha256 == sha256_hex(prompt);
    if (!match) continue;
    if (rule.error) {
      if (*rule.error == "timeout") throw GatewayError(ErrorCode::kTimeout, "scripted timeout");
      if (*rule.error == "unavailable") {
        throw GatewayError(ErrorCode::kBackendUnavailable, "scripted backend unavailable");
      }
      throw std::runtime_error("scripted failure: " + *rule.error);
    }
    if (rule.echo) return std::string(prompt);
    const std::size_t n = rule.completions.size();
    return rule.completions[static_cast<std::size_t>(request.sample) % n];
  }
  throw GatewayError(ErrorCode::kReplayMiss,
                     "no scripted rule matches prompt " + sha256_hex(prompt));
}

Gateway::Gateway(std::shared_ptr<Backend> backend, std::shared_ptr<Clock> clock,
                 std::optional<std::filesystem::path> transcript_log)
    : backend_(std::move(backend)), clock_(std::move(clock)), log_path_(std::move(transcript_log)) {
  if (!backend_) fail(ErrorCode::kBackendUnavailable, "no backend configured");
  if (log_path_) {
    log_file_.open(*log_path_, std::ios::binary | std::ios::app);
    if (!log_file_) fail(ErrorCode::kIo, "cannot open transcript log: " + log_path_->string());
  }
}

Completion Gateway::complete(std::string_view prompt, const GenParams& params, int sample,
                             std::string request_id) {
  params.validate();
  CompletionRequest request{prompt, &params, sample};
  const auto started = std::chrono::steady_clock::now();
  std::string completion = backend_->complete(request);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (timeout_seconds_ > 0 && elapsed > timeout_seconds_) {
    throw GatewayError(ErrorCode::kTimeout, "completion exceeded " +
                                                std::to_string(timeout_seconds_) + " s");
  }
  Transcript t;
  t.request_id = std::move(request_id);
  t.prompt_hash = sha256_hex(prompt);
  t.prompt = std::string(prompt);
  t.completion = completion;
  t.params = params;
  t.timestamp = format_iso8601(clock_->now_ms());
  t.backend = backend_->kind();
  t.sample = sample;
  std::lock_guard lock(mu_);
  if (log_file_.is_open()) {
    log_file_ << transcript_to_json_line(t) << '\n';
    log_file_.flush();
  }
  Completion out{std::move(completion), t.request_id};
  log_.push_back(std::move(t));
  return out;
}

std::vector<Transcript> Gateway::transcripts() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::size_t Gateway::call_count() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

Completion GatewaySession::complete(std::string_view prompt, int sample) {
  return complete(prompt, params_, sample);
}

Completion GatewaySession::complete(std::string_view prompt, const GenParams& params, int sample) {
  std::string id;
  {
    std::lock_guard lock(mu_);
    id = scope_ + "/" + std::to_string(next_++);
  }
  Completion c = gateway_.complete(prompt, params, sample, id);
  std::lock_guard lock(mu_);
  ids_.push_back(c.request_id);
  return c;
}

std::size_t GatewaySession::call_count() const {
  std::lock_guard lock(mu_);
  return ids_.size();
}

std::vector<std::string> GatewaySession::request_ids() const {
  std::lock_guard lock(mu_);
  return ids_;
}

void GatewaySession::set_next_index(std::size_t n) {
  std::lock_guard lock(mu_);
  next_ = n;
}

namespace {

bool is_fence(std::string_view line) {
  const std::string_view t = text::trim(line);
  return t.size() >= 3 && t.substr(0, 3) == "```";
}

std::string fence_label(std::string_view line) {
  std::string_view t = text::trim(line);
  while (!t.empty() && t.front() == '`') t.remove_prefix(1);
  return text::to_lower_ascii(text::trim(t));
}

}  // namespace

std::string extract_code_block(std::string_view completion) {
  struct Block {
    std::string label;
    std::vector<std::string_view> lines;
  };
  const auto lines = text::split_lines(completion);
  std::vector<Block> blocks;
  bool inside = false;
  for (auto line : lines) {
    if (is_fence(line)) {
      if (inside) {
        inside = false;
      } else {
        inside = true;
        blocks.push_back({fence_label(line), {}});
      }
      continue;
    }
    if (inside) blocks.back().lines.push_back(line);
  }

  const Block* chosen = nullptr;
  for (const auto& b : blocks) {
    if (b.label == "lean" || b.label == "lean4") chosen = &b;
  }
  if (!chosen) {
    for (const auto& b : blocks) {
      if (b.label.empty()) chosen = &b;
    }
  }

  std::string out;
  if (chosen) {
    for (std::size_t i = 0; i < chosen->lines.size(); ++i) {
      if (i) out += '\n';
      out += chosen->lines[i];
    }
  } else {
    bool first = true;
    for (auto line : lines) {
      if (is_fence(line)) continue;
      if (!first) out += '\n';
      out += line;
      first = false;
    }
  }
  out = std::string(text::trim(out));
  if (out.empty()) fail(ErrorCode::kEmptyCompletion, "completion contains no code");
  return out;
}

}  // namespace leaninst
