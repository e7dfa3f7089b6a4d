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

#include "leaninst/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "fsutil.hpp"
#include "leaninst/error.hpp"
#include "leaninst/error_kb.hpp"
#include "leaninst/repair_engine.hpp"
#include "leaninst/skeleton_builder.hpp"
#include "leaninst/text.hpp"

namespace leaninst {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const char* const kConfigKeys[] = {
    "manifest",          "templates_dir",    "examples_dir",       "prompts_dir",
    "kb_path",           "run_dir",          "backend",            "backend_fixture",
    "judge_backend",     "judge_fixture",    "mv_rounds",          "model_name",
    "temperature",       "max_tokens",       "top_p",              "frequency_penalty",
    "judge_model_name",  "judge_temperature", "gateway_timeout",   "backbone_attempts",
    "proof_attempts",    "correction_steps", "final_fix_attempts", "retrieval_k",
    "checker",           "mock_fixtures",    "lean_workspace",     "checker_timeout",
    "workers",           "clock",            "kb_write_back"};

[[noreturn]] void config_error(std::string_view key, const std::string& why) {
  fail(ErrorCode::kConfig, "config key '" + std::string(key) + "': " + why);
}

int to_int(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const int n = std::stoi(std::string(v), &used);
    if (used != v.size()) config_error(key, "expected an integer");
    return n;
  } catch (const std::logic_error&) {
    config_error(key, "expected an integer");
  }
}

double to_double(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(std::string(v), &used);
    if (used != v.size()) config_error(key, "expected a number");
    return d;
  } catch (const std::logic_error&) {
    config_error(key, "expected a number");
  }
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  config_error(key, "expected true or false");
}

fs::path to_path(std::string_view v, const fs::path& base) {
  fs::path p{std::string(v)};
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

std::string env_name(std::string_view key) {
  std::string out = "LEANINST_";
  for (char c : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

void set_config_value(RunConfig& c, std::string_view key, std::string_view v,
                      const fs::path& base) {
  if (key == "manifest") c.manifest = to_path(v, base);
  else if (key == "templates_dir") c.templates_dir = to_path(v, base);
  else if (key == "examples_dir") c.examples_dir = to_path(v, base);
  else if (key == "prompts_dir") c.prompts_dir = to_path(v, base);
  else if (key == "kb_path") c.kb_path = v.empty() ? fs::path() : to_path(v, base);
  else if (key == "run_dir") c.run_dir = to_path(v, base);
  else if (key == "backend") c.backend = parse_backend_kind(v);
  else if (key == "backend_fixture") c.backend_fixture = to_path(v, base);
  else if (key == "judge_backend") {
    if (v == "none" || v.empty()) c.judge_backend.reset();
    else c.judge_backend = parse_backend_kind(v);
  } else if (key == "judge_fixture") c.judge_fixture = to_path(v, base);
  else if (key == "mv_rounds") c.mv_rounds = to_int(key, v);
  else if (key == "model_name") c.gen.model_name = std::string(v);
  else if (key == "temperature") c.gen.temperature = to_double(key, v);
  else if (key == "max_tokens") c.gen.max_tokens = to_int(key, v);
  else if (key == "top_p") c.gen.top_p = to_double(key, v);
  else if (key == "frequency_penalty") c.gen.frequency_penalty = to_double(key, v);
  else if (key == "judge_model_name") c.judge_params.model_name = std::string(v);
  else if (key == "judge_temperature") c.judge_params.temperature = to_double(key, v);
  else if (key == "gateway_timeout") c.gateway_timeout_seconds = to_double(key, v);
  else if (key == "backbone_attempts") c.backbone_attempts = to_int(key, v);
  else if (key == "proof_attempts") c.proof_attempts = to_int(key, v);
  else if (key == "correction_steps") c.correction_steps = to_int(key, v);
  else if (key == "final_fix_attempts") c.final_fix_attempts = to_int(key, v);
  else if (key == "retrieval_k") c.retrieval_k = to_int(key, v);
  else if (key == "checker") {
    if (v == "mock") c.checker = CheckerMode::kMock;
    else if (v == "real") c.checker = CheckerMode::kReal;
    else config_error(key, "expected mock or real");
  } else if (key == "mock_fixtures") c.mock_fixtures = to_path(v, base);
  else if (key == "lean_workspace") c.lean_workspace = to_path(v, base);
  else if (key == "checker_timeout") c.checker_timeout_seconds = to_double(key, v);
  else if (key == "workers") c.workers = to_int(key, v);
  else if (key == "clock") {
    if (v == "system") c.clock = ClockMode::kSystem;
    else if (v == "virtual") c.clock = ClockMode::kVirtual;
    else config_error(key, "expected system or virtual");
  } else if (key == "kb_write_back") c.kb_write_back = to_bool(key, v);
  else fail(ErrorCode::kConfig, "unknown config key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text_view, const fs::path& base, bool apply_env) {
  RunConfig c;
  c.judge_params.model_name = "deepseek-chat";
  int ln = 0;
  for (std::string_view raw : text::split_lines(text_view)) {
    ++ln;
    std::string_view l = raw;
    if (auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    l = text::trim(l);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::kConfig, "config line " + std::to_string(ln) + ": expected key = value");
    }
    try {
      set_config_value(c, text::trim(l.substr(0, eq)), text::trim(l.substr(eq + 1)), base);
    } catch (const Error& e) {
      fail(ErrorCode::kConfig, "config line " + std::to_string(ln) + ": " + e.what());
    }
  }
  if (apply_env) {
    for (const char* key : kConfigKeys) {
      if (const char* v = std::getenv(env_name(key).c_str())) {
        try {
          set_config_value(c, key, text::trim(v), fs::current_path());
        } catch (const Error& e) {
          fail(ErrorCode::kConfig, env_name(key) + ": " + e.what());
        }
      }
    }
  }
  return c;
}

RunConfig load_config(const fs::path& path, bool apply_env) {
  if (!fs::exists(path)) fail(ErrorCode::kConfig, "config file not found: " + path.string());
  return parse_config(detail::read_file(path), fs::absolute(path).parent_path(), apply_env);
}

void RunConfig::validate() const {
  auto need = [](const fs::path& p, const char* key) {
    if (p.empty()) fail(ErrorCode::kConfig, std::string("config key '") + key + "' is required");
  };
  need(manifest, "manifest");
  need(templates_dir, "templates_dir");
  need(examples_dir, "examples_dir");
  need(prompts_dir, "prompts_dir");
  need(run_dir, "run_dir");
  if (backend != BackendKind::kLive) need(backend_fixture, "backend_fixture");
  if (judge_backend && *judge_backend != BackendKind::kLive) need(judge_fixture, "judge_fixture");
  if (checker == CheckerMode::kMock) need(mock_fixtures, "mock_fixtures");
  if (checker == CheckerMode::kReal) need(lean_workspace, "lean_workspace");
  auto positive = [](int v, const char* key) {
    if (v < 1) fail(ErrorCode::kConfig, std::string("config key '") + key + "' must be >= 1");
  };
  positive(backbone_attempts, "backbone_attempts");
  positive(proof_attempts, "proof_attempts");
  positive(final_fix_attempts, "final_fix_attempts");
  positive(retrieval_k, "retrieval_k");
  positive(workers, "workers");
  positive(mv_rounds, "mv_rounds");
  if (correction_steps < 0) fail(ErrorCode::kConfig, "config key 'correction_steps' must be >= 0");
  try {
    gen.validate();
    judge_params.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, e.what());
  }
}

bool RunRecord::done(std::string_view step) const {
  return std::find(completed_stages.begin(), completed_stages.end(), step) !=
         completed_stages.end();
}

std::string run_record_to_json(const RunRecord& r) {
  json j;
  j["problem_id"] = r.problem_id;
  j["class_id"] = r.class_id;
  j["status"] = r.status;
  j["error"] = r.error;
  j["completed_stages"] = r.completed_stages;
  j["outputs"] = r.outputs;
  json d = json::object();
  for (Stage s : kAllStages) d[stage_name(s)] = r.durations[static_cast<std::size_t>(s)];
  j["durations_ms"] = d;
  j["attempts"] = r.attempts;
  j["transcript_ids"] = r.transcript_ids;
  j["files"] = r.files;
  j["gateway_calls"] = r.gateway_calls;
  j["harmless"] = r.harmless;
  j["fully_proved"] = r.fully_proved;
  j["harmless_phase"] = r.harmless_phase;
  json c = json::array();
  for (const auto& x : r.commented) {
    c.push_back({{"name", x.name}, {"category", decl_category_name(x.category)}});
  }
  j["commented_out"] = c;
  j["backtranslation_count_ok"] = r.backtranslation_count_ok;
  j["score"] = r.score ? json::parse(file_score_to_json(*r.score)) : json(nullptr);
  j["mv_score"] = r.mv_score ? json(*r.mv_score) : json(nullptr);
  return j.dump(2) + "\n";
}

RunRecord run_record_from_json(std::string_view text_view) {
  try {
    const json j = json::parse(text_view);
    RunRecord r;
    r.problem_id = j.at("problem_id").get<std::string>();
    r.class_id = j.at("class_id").get<std::string>();
    r.status = j.at("status").get<std::string>();
    r.error = j.value("error", "");
    r.completed_stages = j.at("completed_stages").get<std::vector<std::string>>();
    r.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    const auto& d = j.at("durations_ms");
    for (Stage s : kAllStages) {
      r.durations[static_cast<std::size_t>(s)] = d.value(stage_name(s), std::int64_t{0});
    }
    r.attempts = j.at("attempts").get<std::map<std::string, int>>();
    r.transcript_ids = j.at("transcript_ids").get<std::vector<std::string>>();
    r.files = j.at("files").get<std::vector<std::string>>();
    r.gateway_calls = j.at("gateway_calls").get<int>();
    r.harmless = j.at("harmless").get<bool>();
    r.fully_proved = j.at("fully_proved").get<bool>();
    r.harmless_phase = j.value("harmless_phase", 0);
    for (const auto& x : j.at("commented_out")) {
      const auto cat = parse_decl_category(x.at("category").get<std::string>());
      if (!cat) fail(ErrorCode::kSchemaViolation, "record: bad declaration category");
      r.commented.push_back({x.at("name").get<std::string>(), *cat});
    }
    r.backtranslation_count_ok = j.value("backtranslation_count_ok", false);
    if (!j.at("score").is_null()) r.score = file_score_from_json(j.at("score").dump());
    if (!j.at("mv_score").is_null()) r.mv_score = j.at("mv_score").get<double>();
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchemaViolation, std::string("run record: ") + e.what());
  }
}

std::vector<const ProblemSpec*> select_problems(const Manifest& m, std::string_view filter) {
  std::vector<std::string> wanted;
  for (std::string_view part : text::split_lines(filter)) {
    std::size_t start = 0;
    while (start <= part.size()) {
      const auto comma = part.find(',', start);
      const auto tok = text::trim(part.substr(start, comma == std::string_view::npos
                                                         ? std::string_view::npos
                                                         : comma - start));
      if (!tok.empty()) wanted.emplace_back(tok);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  std::vector<const ProblemSpec*> out;
  for (const auto& p : m.problems) {
    if (wanted.empty() || std::find(wanted.begin(), wanted.end(), p.id) != wanted.end() ||
        std::find(wanted.begin(), wanted.end(), p.class_id) != wanted.end()) {
      out.push_back(&p);
    }
  }
  return out;
}

namespace {

std::shared_ptr<Backend> make_backend(BackendKind kind, const fs::path& fixture) {
  switch (kind) {
    case BackendKind::kScripted: return ScriptedBackend::from_file(fixture);
    case BackendKind::kReplay: return ReplayBackend::from_file(fixture);
    case BackendKind::kLive: return std::make_shared<LiveBackend>(LiveBackend::options_from_env());
  }
  fail(ErrorCode::kConfig, "unknown backend");
}

std::shared_ptr<Clock> make_clock(ClockMode mode) {
  if (mode == ClockMode::kVirtual) return std::make_shared<VirtualClock>();
  return std::make_shared<SystemClock>();
}

void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kConfig, "run dir not writable: " + dir.string() + ": " + ec.message());
  const fs::path probe = dir / ".write_probe";
  try {
    detail::write_file_atomic(probe, "");
  } catch (const Error&) {
    fail(ErrorCode::kConfig, "run dir not writable: " + dir.string());
  }
  fs::remove(probe, ec);
}

class RunLog {
 public:
  explicit RunLog(fs::path path) : path_(std::move(path)) {}
  void write(Clock& clock, std::string_view problem, std::string_view event,
             const json& detail = json::object()) {
    json j = {{"ts", format_iso8601(clock.now_ms())},
              {"problem", problem},
              {"event", event},
              {"detail", detail}};
    std::lock_guard<std::mutex> lock(mu_);
    detail::append_file(path_, j.dump() + "\n");
  }

 private:
  fs::path path_;
  std::mutex mu_;
};

struct Shared {
  const RunConfig& cfg;
  const TemplateStore& store;
  const PromptLibrary& prompts;
  std::shared_ptr<Backend> backend;
  std::shared_ptr<Backend> judge_backend;
  Checker& checker;
  ErrorKB& kb;
  RunLog& log;
};

RunRecord process(const ProblemSpec& problem, Shared& sh) {
  const RunConfig& cfg = sh.cfg;
  const fs::path dir = cfg.run_dir / problem.id;
  fs::create_directories(dir);
  const fs::path record_path = dir / "record.json";
  RunRecord rec;
  if (fs::exists(record_path)) {
    rec = run_record_from_json(detail::read_file(record_path));
  } else {
    rec.problem_id = problem.id;
    rec.class_id = problem.class_id;
  }
  if (rec.status == "complete") return rec;
  rec.status = "pending";
  rec.error.clear();

  auto clock = make_clock(cfg.clock);
  Gateway gateway(sh.backend, clock, dir / "transcripts.jsonl");
  gateway.set_timeout_seconds(cfg.gateway_timeout_seconds);
  GatewaySession session(gateway, problem.id, cfg.gen);
  session.set_next_index(static_cast<std::size_t>(rec.gateway_calls));
  const std::vector<std::string> prior_ids = rec.transcript_ids;
  const int prior_calls = rec.gateway_calls;

  auto add_file = [&](const std::string& name, std::string_view data) {
    detail::write_file_atomic(dir / name, data);
    if (std::find(rec.files.begin(), rec.files.end(), name) == rec.files.end()) {
      rec.files.push_back(name);
    }
  };
  auto save = [&] {
    rec.transcript_ids = prior_ids;
    for (const auto& id : session.request_ids()) rec.transcript_ids.push_back(id);
    rec.gateway_calls = prior_calls + static_cast<int>(session.call_count());
    detail::write_file_atomic(record_path, run_record_to_json(rec));
  };
  auto finish_step = [&](std::string_view step) {
    rec.completed_stages.emplace_back(step);
    save();
    sh.log.write(*clock, problem.id, "step_done", {{"step", step}});
  };
  auto output_of = [&](std::string_view step) {
    return detail::read_file(dir / rec.outputs.at(std::string(step)));
  };
  auto dur = [&](Stage s) -> std::int64_t& { return rec.durations[static_cast<std::size_t>(s)]; };

  try {
    const auto tmpl = sh.store.load_template(problem.template_ref);
    const std::string example = sh.store.load_example(problem.example_ref);
    RepairLimits limits;
    limits.max_correction_steps = cfg.correction_steps;
    limits.max_proof_attempts = cfg.proof_attempts;
    limits.retrieval_k = static_cast<std::size_t>(cfg.retrieval_k);
    RepairEngine engine(sh.checker, sh.kb, sh.prompts, clock, limits);
    Postprocessor post(engine, sh.prompts, cfg.final_fix_attempts);
    const std::string label = problem.id + ".lean";
    std::string cur;

    if (rec.done(steps::kGeneration)) {
      cur = output_of(steps::kGeneration);
    } else {
      const std::int64_t t0 = clock->now_ms();
      const Skeleton sk =
          build_skeleton(problem, *tmpl, example, session, sh.prompts, cfg.backbone_attempts);
      for (const auto& a : sk.attempts) {
        if (!a.source.empty()) add_file("skeleton_" + std::to_string(a.attempt) + ".lean", a.source);
      }
      cur = sk.source;
      const std::string name = "skeleton_" + std::to_string(sk.generation_attempt) + ".lean";
      add_file(name, cur);
      rec.outputs[std::string(steps::kGeneration)] = name;
      rec.attempts["generation"] = static_cast<int>(sk.attempts.size());
      dur(Stage::kGeneration) = clock->now_ms() - t0;
      finish_step(steps::kGeneration);
    }

    if (rec.done(steps::kBackbone)) {
      cur = output_of(steps::kBackbone);
    } else {
      const std::int64_t t0 = clock->now_ms();
      const RepairOutcome r = engine.repair(cur, session, tmpl.get(), label,
                                            [&](int i, const std::string& s) {
                                              add_file("repair_backbone_" + std::to_string(i) + ".lean", s);
                                            });
      cur = r.final_source;
      add_file("repair_backbone_final.lean", cur);
      rec.outputs[std::string(steps::kBackbone)] = "repair_backbone_final.lean";
      rec.attempts["backbone_correction"] = r.iterations_used;
      dur(Stage::kBackboneCorrection) = clock->now_ms() - t0;
      if (r.gateway_error) {
        sh.log.write(*clock, problem.id, "gateway_error", {{"step", steps::kBackbone}, {"message", *r.gateway_error}});
      }
      finish_step(steps::kBackbone);
    }

    if (rec.done(steps::kProofs)) {
      cur = output_of(steps::kProofs);
    } else {
      const ProofOutcome p = engine.refine_proofs(cur, session, *tmpl, label,
                                                  [&](int i, const std::string& s) {
                                                    add_file("repair_proof_" + std::to_string(i) + ".lean", s);
                                                  });
      cur = p.source;
      add_file("repair_proof_final.lean", cur);
      rec.outputs[std::string(steps::kProofs)] = "repair_proof_final.lean";
      rec.attempts["proof_generation"] = p.attempts;
      int proof_fixes = 0;
      for (const auto& r : p.repairs) proof_fixes += r.iterations_used;
      rec.attempts["proof_correction"] = proof_fixes;
      dur(Stage::kProofGeneration) = p.generation_ms;
      dur(Stage::kProofCorrection) = p.correction_ms;
      if (p.gateway_error) {
        sh.log.write(*clock, problem.id, "gateway_error", {{"step", steps::kProofs}, {"message", *p.gateway_error}});
      }
      finish_step(steps::kProofs);
    }

    if (rec.done(steps::kHarmless)) {
      cur = output_of(steps::kHarmless);
    } else {
      const std::int64_t t0 = clock->now_ms();
      const FinalArtifact fa = post.harmless_fix(cur, session, label);
      cur = fa.source;
      add_file("final.lean", cur);
      rec.outputs[std::string(steps::kHarmless)] = "final.lean";
      rec.harmless = fa.harmless;
      rec.fully_proved = fa.fully_proved;
      rec.harmless_phase = fa.phase;
      rec.commented = fa.commented;
      rec.attempts["final_fix"] = fa.llm_attempts;
      dur(Stage::kHarmlessFixing) += clock->now_ms() - t0;
      if (!fa.sorried_decls.empty() || !fa.commented_out_decls.empty()) {
        sh.log.write(*clock, problem.id, "incomplete",
                     {{"sorried", fa.sorried_decls}, {"commented_out", fa.commented_out_decls}});
      }
      if (!fa.harmless) {
        sh.log.write(*clock, problem.id, "harmless_failed", {{"report", fa.failure_report}});
      }
      finish_step(steps::kHarmless);
    }

    if (!rec.done(steps::kBacktranslation)) {
      const std::int64_t t0 = clock->now_ms();
      if (text::is_blank(cur)) {
        add_file("final_report.md", "");
      } else {
        const Backtranslation b = post.backtranslate(cur, session);
        add_file("final_report.md", b.report);
        rec.backtranslation_count_ok = b.count_matches;
        if (!b.count_matches) {
          sh.log.write(*clock, problem.id, "backtranslation_mismatch",
                       {{"expected_blocks", b.expected_blocks}, {"found_blocks", b.found_blocks}});
        }
      }
      rec.outputs[std::string(steps::kBacktranslation)] = "final_report.md";
      dur(Stage::kHarmlessFixing) += clock->now_ms() - t0;
      finish_step(steps::kBacktranslation);
    }

    if (!rec.done(steps::kScoring)) {
      const CheckReport report = engine.check(cur, label);
      rec.score = score_file(problem.id, cur, report, rec.commented);
      finish_step(steps::kScoring);
    }

    if (sh.judge_backend && !rec.done(steps::kMajorityVote)) {
      Gateway judge(sh.judge_backend, clock, dir / "judge_transcripts.jsonl");
      judge.set_timeout_seconds(cfg.gateway_timeout_seconds);
      GatewaySession js(judge, problem.id + "/judge", cfg.judge_params);
      const CheckReport report = engine.check(cur, label);
      try {
        rec.mv_score = majority_vote(problem, cur, report.diagnostics, js, sh.prompts, cfg.mv_rounds).score;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kMvInconclusive) throw;
        sh.log.write(*clock, problem.id, "mv_inconclusive", {{"message", e.what()}});
      }
      finish_step(steps::kMajorityVote);
    }
    rec.status = "complete";
    save();
  } catch (const std::exception& e) {
    rec.status = "failed";
    rec.error = e.what();
    save();
    sh.log.write(*clock, problem.id, "failed", {{"message", e.what()}});
  }
  return rec;
}

}  // namespace

RunSummary run_pipeline(const RunConfig& cfg, std::string_view filter) {
  cfg.validate();
  ensure_writable(cfg.run_dir);
  const Manifest manifest = load_manifest(cfg.manifest, ClassRegistry::defaults());
  const auto selected = select_problems(manifest, filter);
  RunSummary summary;
  if (selected.empty()) {
    summary.warnings.push_back("no problem matches filter '" + std::string(filter) + "'");
    return summary;
  }
  const TemplateStore store(cfg.templates_dir, cfg.examples_dir);
  for (const ProblemSpec* p : selected) {
    store.load_template(p->template_ref);
    store.load_example(p->example_ref);
  }
  const PromptLibrary prompts = PromptLibrary::load_dir(cfg.prompts_dir);

  std::unique_ptr<Checker> checker;
  if (cfg.checker == CheckerMode::kMock) {
    checker = std::make_unique<MockChecker>(cfg.mock_fixtures);
  } else {
    LakeCheckerOptions o;
    o.workspace = cfg.lean_workspace;
    o.timeout_seconds = cfg.checker_timeout_seconds;
    checker = std::make_unique<LakeChecker>(o);
  }
  auto backend = make_backend(cfg.backend, cfg.backend_fixture);
  std::shared_ptr<Backend> judge_backend;
  if (cfg.judge_backend) judge_backend = make_backend(*cfg.judge_backend, cfg.judge_fixture);

  ErrorKB kb(make_clock(cfg.clock));
  if (!cfg.kb_path.empty()) {
    std::vector<CorruptLine> corrupt;
    kb.load(cfg.kb_path, &corrupt);
    for (const auto& c : corrupt) {
      summary.warnings.push_back("kb line " + std::to_string(c.line_no) + " skipped: " + c.reason);
    }
  }
  // Entries learned by an interrupted earlier run of this run dir.
  const fs::path learned = cfg.run_dir / "kb_learned.jsonl";
  if (fs::exists(learned)) {
    const std::string learned_text = detail::read_file(learned);
    for (std::string_view l : text::split_lines(learned_text)) {
      if (!text::is_blank(l)) kb.add(kb_entry_from_json_line(l));
    }
  }
  kb.attach(learned);

  std::string snapshot;
  for (const auto& p : manifest.problems) snapshot += problem_to_json_line(p) + "\n";
  detail::write_file_atomic(cfg.run_dir / "manifest.jsonl", snapshot);

  RunLog log(cfg.run_dir / "run.log");
  Shared sh{cfg, store, prompts, backend, judge_backend, *checker, kb, log};
  summary.records.resize(selected.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < selected.size(); i = next++) {
      summary.records[i] = process(*selected[i], sh);
    }
  };
  const int n = std::min<int>(cfg.workers, static_cast<int>(selected.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& r : summary.records) {
    if (r.status != "complete") ++summary.failed;
  }
  if (cfg.kb_write_back && !cfg.kb_path.empty()) kb.persist(cfg.kb_path);
  return summary;
}

std::vector<RunRecord> load_run_records(const fs::path& run_dir) {
  std::vector<RunRecord> out;
  if (!fs::is_directory(run_dir)) return out;
  std::vector<fs::path> dirs;
  for (const auto& de : fs::directory_iterator(run_dir)) {
    if (de.is_directory() && fs::exists(de.path() / "record.json")) dirs.push_back(de.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) out.push_back(run_record_from_json(detail::read_file(d / "record.json")));
  return out;
}

EvalReport evaluate_run_dir(const fs::path& run_dir) {
  const auto records = load_run_records(run_dir);
  std::vector<FileScore> scores;
  for (const auto& r : records) {
    if (r.score) scores.push_back(*r.score);
  }
  if (scores.empty()) fail(ErrorCode::kNotFound, "no runs found in " + run_dir.string());
  const Manifest manifest = load_manifest(run_dir / "manifest.jsonl", ClassRegistry::defaults());
  EvalReport report = aggregate(scores, manifest);
  for (const auto& r : records) {
    if (r.mv_score) report.mv_scores[r.problem_id] = *r.mv_score;
  }
  return report;
}

ReportFiles write_report(const fs::path& run_dir) {
  const EvalReport report = evaluate_run_dir(run_dir);
  ReportFiles out;
  out.json = eval_report_to_json(report) + "\n";
  out.text = eval_report_to_text(report);
  std::vector<StageDurations> durations;
  for (const auto& r : load_run_records(run_dir)) durations.push_back(r.durations);
  try {
    out.timing_csv = timing_csv(timing_report(durations));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kEmptyRunSet) throw;
    out.timing_csv = "stage,total_ms,share_percent\n";
  }
  detail::write_file_atomic(run_dir / "report.json", out.json);
  detail::write_file_atomic(run_dir / "report.txt", out.text);
  detail::write_file_atomic(run_dir / "timing.csv", out.timing_csv);
  return out;
}

}  // namespace leaninst
