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

#include "leaninst/error_kb.hpp"

#include <algorithm>

#include <json.hpp>

#include "fsutil.hpp"
#include "leaninst/error.hpp"
#include "leaninst/text.hpp"

namespace leaninst {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string kb_entry_to_json_line(const KBEntry& e) {
  json j = json::object();
  j["id"] = e.id;
  j["kind"] = error_kind_name(e.kind);
  j["message"] = e.message;
  j["faulty_snippet"] = e.faulty_snippet;
  j["fixed_snippet"] = e.fixed_snippet;
  j["explanation"] = {{"error_type", e.explanation.error_type},
                      {"root_cause", e.explanation.root_cause},
                      {"fix_description", e.explanation.fix_description},
                      {"why_it_works", e.explanation.why_it_works}};
  j["created_at"] = e.created_at;
  j["use_count"] = e.use_count;
  if (e.origin) j["origin"] = *e.origin;
  return j.dump();
}

KBEntry kb_entry_from_json_line(std::string_view line) {
  try {
    const json j = json::parse(line);
    KBEntry e;
    e.id = j.at("id").get<std::int64_t>();
    const auto kind = parse_error_kind(j.at("kind").get<std::string>());
    if (!kind) fail(ErrorCode::kSchemaViolation, "unknown error kind");
    e.kind = *kind;
    e.message = j.at("message").get<std::string>();
    e.faulty_snippet = j.at("faulty_snippet").get<std::string>();
    e.fixed_snippet = j.at("fixed_snippet").get<std::string>();
    const auto& x = j.at("explanation");
    e.explanation.error_type = x.at("error_type").get<std::string>();
    e.explanation.root_cause = x.at("root_cause").get<std::string>();
    e.explanation.fix_description = x.at("fix_description").get<std::string>();
    e.explanation.why_it_works = x.at("why_it_works").get<std::string>();
    e.created_at = j.at("created_at").get<std::string>();
    e.use_count = j.at("use_count").get<std::int64_t>();
    if (auto it = j.find("origin"); it != j.end()) e.origin = it->get<std::string>();
    return e;
  } catch (const json::exception& ex) {
    fail(ErrorCode::kSchemaViolation, ex.what());
  }
}

std::set<std::string> masked_tokens(std::string_view message) {
  std::set<std::string> out;
  std::size_t i = 0;
  auto alnum = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
  };
  while (i < message.size()) {
    if (!alnum(message[i])) {
      ++i;
      continue;
    }
    std::size_t e = i;
    while (e < message.size() && alnum(message[e])) ++e;
    std::string tok = text::to_lower_ascii(message.substr(i, e - i));
    if (std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      tok = "<n>";
    } else if (tok.size() == 1) {
      tok = "<v>";
    }
    out.insert(std::move(tok));
    i = e;
  }
  return out;
}

double similarity(std::string_view a, std::string_view b) {
  const auto ta = masked_tokens(a);
  const auto tb = masked_tokens(b);
  if (ta.empty() && tb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& t : ta) inter += tb.count(t);
  const std::size_t uni = ta.size() + tb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

constexpr std::string_view kLabels[] = {"error type", "root cause", "fix description",
                                        "why it works"};

// Index of the label starting `line`, or -1. Leading list markers, heading
// hashes and bold markers are tolerated.
int label_of(std::string_view line, std::string_view& content) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '-' ||
                             line[i] == '#' || line[i] == '*' || line[i] == '>')) {
    ++i;
  }
  const std::string lower = text::to_lower_ascii(line.substr(i));
  for (int k = 0; k < 4; ++k) {
    const auto& lab = kLabels[k];
    if (lower.compare(0, lab.size(), lab) != 0) continue;
    std::size_t p = lab.size();
    while (p < lower.size() && lower[p] == '*') ++p;
    if (p >= lower.size() || lower[p] != ':') continue;
    ++p;
    while (p < lower.size() && lower[p] == '*') ++p;
    content = text::trim(line.substr(i + p));
    return k;
  }
  return -1;
}

}  // namespace

std::optional<Explanation> parse_explanation(std::string_view completion) {
  std::string parts[4];
  bool seen[4] = {false, false, false, false};
  int current = -1;
  for (std::string_view l : text::split_lines(completion)) {
    std::string_view content;
    const int k = label_of(l, content);
    if (k >= 0 && !seen[k]) {
      current = k;
      seen[k] = true;
      parts[k] = std::string(content);
      continue;
    }
    if (current >= 0) {
      if (!parts[current].empty()) parts[current] += '\n';
      parts[current] += l;
    }
  }
  for (int k = 0; k < 4; ++k) {
    parts[k] = std::string(text::trim(parts[k]));
    if (!seen[k] || parts[k].empty()) return std::nullopt;
  }
  return Explanation{parts[0], parts[1], parts[2], parts[3]};
}

std::vector<std::int64_t> RetrievalResult::ids() const {
  std::vector<std::int64_t> out;
  for (const auto& s : entries) out.push_back(s.entry.id);
  return out;
}

ErrorKB::ErrorKB(std::shared_ptr<Clock> clock) : clock_(std::move(clock)) {}

void ErrorKB::load(const fs::path& path, std::vector<CorruptLine>* corrupt) {
  std::vector<KBEntry> loaded;
  std::int64_t next = 1;
  if (fs::exists(path)) {
    const std::string data = detail::read_file(path);
    int ln = 0;
    for (std::string_view l : text::split_lines(data)) {
      ++ln;
      if (text::is_blank(l)) continue;
      try {
        KBEntry e = kb_entry_from_json_line(l);
        next = std::max(next, e.id + 1);
        loaded.push_back(std::move(e));
      } catch (const Error& ex) {
        if (corrupt) corrupt->push_back({ln, ex.what()});
      }
    }
  }
  std::lock_guard<std::mutex> lock(mu_);
  entries_ = std::move(loaded);
  next_id_ = next;
}

void ErrorKB::persist(const fs::path& path) const {
  std::string out;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& e : entries_) out += kb_entry_to_json_line(e) + "\n";
  }
  detail::write_file_atomic(path, out);
}

void ErrorKB::attach(const fs::path& path) {
  std::lock_guard<std::mutex> lock(mu_);
  attached_ = path;
}

RetrievalResult ErrorKB::rank(std::string_view message, std::size_t k) const {
  const ErrorKind qkind = normalize_error(message);
  struct Cand {
    const KBEntry* e;
    bool same;
    double sim;
  };
  std::vector<Cand> cands;
  cands.reserve(entries_.size());
  for (const auto& e : entries_) cands.push_back({&e, e.kind == qkind, similarity(message, e.message)});
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.same != b.same) return a.same;
    if (a.sim != b.sim) return a.sim > b.sim;
    return a.e->id > b.e->id;
  });
  RetrievalResult r;
  for (std::size_t i = 0; i < cands.size() && i < k; ++i) {
    r.entries.push_back({*cands[i].e, 0.5 * (cands[i].same ? 1.0 : 0.0) + 0.5 * cands[i].sim});
  }
  return r;
}

RetrievalResult ErrorKB::retrieve(std::string_view message, std::size_t k) {
  std::lock_guard<std::mutex> lock(mu_);
  RetrievalResult r = rank(message, k);
  for (auto& s : r.entries) {
    for (auto& e : entries_) {
      if (e.id == s.entry.id) {
        ++e.use_count;
        break;
      }
    }
  }
  return r;
}

RetrievalResult ErrorKB::peek(std::string_view message, std::size_t k) const {
  std::lock_guard<std::mutex> lock(mu_);
  return rank(message, k);
}

void ErrorKB::append_locked(const KBEntry& e) {
  if (attached_) detail::append_file(*attached_, kb_entry_to_json_line(e) + "\n");
}

KBEntry ErrorKB::add(KBEntry e) {
  std::lock_guard<std::mutex> lock(mu_);
  e.id = next_id_++;
  e.kind = normalize_error(e.message);
  if (e.created_at.empty()) e.created_at = format_iso8601(clock_->now_ms());
  entries_.push_back(e);
  append_locked(e);
  return e;
}

KBEntry ErrorKB::record_fix(std::string_view message, std::string_view faulty,
                            std::string_view fixed, GatewaySession& session,
                            const PromptLibrary& prompts) {
  if (faulty == fixed) fail(ErrorCode::kInvalidArgument, "record_fix: fixed equals faulty");
  const std::string prompt = prompts.render(
      prompt_ids::kFixExplanation,
      {{"original code", std::string(faulty)}, {"fix code", std::string(fixed)}});
  const Completion c = session.complete(prompt);
  KBEntry e;
  e.kind = normalize_error(message);
  e.message = std::string(message);
  e.faulty_snippet = std::string(faulty);
  e.fixed_snippet = std::string(fixed);
  if (auto x = parse_explanation(c.text)) {
    e.explanation = std::move(*x);
  } else {
    e.explanation = {"unparsed", "unparsed",
                     text::is_blank(c.text) ? std::string("unparsed") : c.text, "unparsed"};
  }
  return add(std::move(e));
}

std::size_t ErrorKB::import_seed(const fs::path& dir, std::vector<CorruptLine>* corrupt) {
  if (!fs::is_directory(dir)) fail(ErrorCode::kNotFound, "seed directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& de : fs::directory_iterator(dir)) {
    if (de.is_regular_file() && de.path().extension() == ".jsonl") files.push_back(de.path());
  }
  std::sort(files.begin(), files.end());
  std::size_t n = 0;
  for (const auto& f : files) {
    const std::string data = detail::read_file(f);
    int ln = 0;
    for (std::string_view l : text::split_lines(data)) {
      ++ln;
      if (text::is_blank(l)) continue;
      try {
        KBEntry e = kb_entry_from_json_line(l);
        add(std::move(e));
        ++n;
      } catch (const Error& ex) {
        if (corrupt) corrupt->push_back({ln, f.filename().string() + ": " + ex.what()});
      }
    }
  }
  return n;
}

std::vector<KBEntry> ErrorKB::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_;
}

std::optional<KBEntry> ErrorKB::get(std::int64_t id) const {
  std::lock_guard<std::mutex> lock(mu_);
  for (const auto& e : entries_) {
    if (e.id == id) return e;
  }
  return std::nullopt;
}

std::size_t ErrorKB::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

std::map<ErrorKind, int> ErrorKB::histogram() const {
  std::map<ErrorKind, int> h;
  for (ErrorKind k : kAllErrorKinds) h[k] = 0;
  std::lock_guard<std::mutex> lock(mu_);
  for (const auto& e : entries_) ++h[e.kind];
  return h;
}

}  // namespace leaninst
