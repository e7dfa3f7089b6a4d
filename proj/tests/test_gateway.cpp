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

#include <algorithm>
#include <thread>

#include "leaninst/clock.hpp"
#include "leaninst/digest.hpp"
#include "leaninst/error.hpp"
#include "leaninst/llm_gateway.hpp"
#include "leaninst/text.hpp"
#include "support.hpp"

using namespace leaninst;
using testing::TempDir;

TEST_SUITE("llm_gateway") {

TEST_CASE("sha256 matches the standard test vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("iso timestamps") {
  CHECK(format_iso8601(0) == "1970-01-01T00:00:00.000Z");
  CHECK(format_iso8601(1767225600123) == "2026-01-01T00:00:00.123Z");
}

TEST_CASE("generation defaults") {
  GenParams p;
  CHECK(p.temperature == doctest::Approx(0.7));
  CHECK(p.max_tokens == 16000);
  CHECK(p.top_p == doctest::Approx(0.9));
  CHECK(p.frequency_penalty == doctest::Approx(0.2));
  CHECK_NOTHROW(p.validate());
  p.top_p = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = GenParams{};
  p.temperature = 2.5;
  CHECK_THROWS_AS(p.validate(), Error);
  p = GenParams{};
  p.max_tokens = 0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("placeholder substitution") {
  PromptTemplate t("t", "Fix {x}");
  CHECK(t.render({{"x", "A"}}) == "Fix A");
  CHECK(t.placeholders() == std::vector<std::string>{"x"});
}

TEST_CASE("bound values are never rescanned and doubled braces are literal") {
  PromptTemplate t("t", "{a} {{b}} {a}");
  CHECK(t.render({{"a", "{a}"}}) == "{a} {b} {a}");
}

TEST_CASE("spaced placeholder names bind by trimmed name") {
  PromptTemplate t("t", "Original: { original code}\nFixed: { fix code}");
  CHECK(t.render({{"original code", "A"}, {"fix code", "B"}}) == "Original: A\nFixed: B");
}

TEST_CASE("missing binding names the placeholder") {
  PromptLibrary lib = testing::shipped_prompts();
  try {
    lib.render(prompt_ids::kBackbone, {{"lean_structure", "S"}, {"lean_example", "E"}});
    FAIL("expected MissingBinding");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingBinding);
    CHECK(std::string(e.what()).find("problem") != std::string::npos);
  }
}

TEST_CASE("unknown template id") {
  PromptLibrary lib;
  try {
    lib.get("nope");
    FAIL("expected UnknownTemplate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownTemplate);
  }
}

TEST_CASE("backbone prompt carries all three bindings verbatim") {
  PromptLibrary lib = testing::shipped_prompts();
  const std::string out = lib.render(
      prompt_ids::kBackbone,
      {{"problem", "PROBLEM-TEXT"}, {"lean_structure", "STRUCT {x}"}, {"lean_example", "EXAMPLE"}});
  CHECK(out.find("PROBLEM-TEXT") != std::string::npos);
  CHECK(out.find("STRUCT {x}") != std::string::npos);
  CHECK(out.find("EXAMPLE") != std::string::npos);
}

TEST_CASE("every shipped prompt renders with no residual placeholder") {
  PromptLibrary lib = testing::shipped_prompts();
  CHECK(lib.ids().size() == 11);
  for (const auto& id : lib.ids()) {
    const PromptTemplate& t = lib.get(id);
    std::map<std::string, std::string> b;
    for (const auto& n : t.placeholders()) b[n] = "<" + n + "-value>";
    const std::string out = t.render(b);
    for (const auto& n : t.placeholders()) {
      CHECK(out.find("{" + n + "}") == std::string::npos);
    }
  }
}

TEST_CASE("rendered length follows the substitution arithmetic") {
  testing::Rng rng(7);
  const std::vector<std::string> words = {"alpha", "", "x", "{y}", "long binding value", "ℝ"};
  PromptLibrary lib = testing::shipped_prompts();
  for (const auto& id : lib.ids()) {
    const PromptTemplate& t = lib.get(id);
    for (int trial = 0; trial < 20; ++trial) {
      std::map<std::string, std::string> b;
      for (const auto& n : t.placeholders()) b[n] = words[rng.below(static_cast<int>(words.size()))];
      // Oracle: count placeholder tokens and literal brace pairs straight from the body.
      const std::string& body = t.body();
      long expected = 0;
      for (std::size_t i = 0; i < body.size();) {
        if (body.compare(i, 2, "{{") == 0 || body.compare(i, 2, "}}") == 0) {
          expected += 1;
          i += 2;
        } else if (body[i] == '{') {
          const std::size_t close = body.find('}', i);
          std::string name = body.substr(i + 1, close - i - 1);
          name = std::string(text::trim(name));
          expected += static_cast<long>(b.at(name).size());
          i = close + 1;
        } else {
          expected += 1;
          ++i;
        }
      }
      CHECK(static_cast<long>(t.render(b).size()) == expected);
    }
  }
}

TEST_CASE("code block extraction") {
  CHECK(extract_code_block("```lean4\ndef a := 1\n```") == "def a := 1");
  CHECK(extract_code_block("prose\n```lean\nA\n```\nmore\n```lean4\nB\n```") == "B");
  CHECK(extract_code_block("def a := 1") == "def a := 1");
  CHECK(extract_code_block("  def a := 1\n\n") == "def a := 1");
  CHECK(extract_code_block("```\nX\n```\n```python\nY\n```") == "X");
  CHECK_THROWS_AS(extract_code_block("```lean4\n```"), Error);
  CHECK_THROWS_AS(extract_code_block("   "), Error);
}

TEST_CASE("code block extraction is idempotent and fence free") {
  const std::vector<std::string> inputs = {
      "```lean4\ndef a := 1\n```", "text\n```lean\nA\nB\n```\ntrailer", "plain code",
      "```lean\nunclosed\nblock", "```\nanon\n```"};
  for (const auto& in : inputs) {
    const std::string once = extract_code_block(in);
    CHECK(extract_code_block(once) == once);
    CHECK(once.find("```") == std::string::npos);
  }
}

TEST_CASE("scripted backend matches rules in order") {
  auto b = ScriptedBackend::from_json_text(R"({"rules": [
    {"contains": ["P"], "excludes": ["skip"], "completions": ["first", "second"]},
    {"contains": ["P"], "completion": "fallback"},
    {"contains": ["boom"], "error": "unavailable"}
  ]})");
  CompletionRequest r{"P", nullptr, 0};
  CHECK(b->complete(r) == "first");
  r.sample = 3;
  CHECK(b->complete(r) == "second");
  r.prompt = "P skip";
  CHECK(b->complete(r) == "fallback");
  r.prompt = "boom";
  CHECK_THROWS_AS(b->complete(r), GatewayError);
  r.prompt = "nothing";
  try {
    b->complete(r);
    FAIL("expected ReplayMiss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kReplayMiss);
  }
}

TEST_CASE("scripted rule without an answer is rejected") {
  CHECK_THROWS_AS(ScriptedBackend::from_json_text(R"({"rules": [{"contains": "x"}]})"), Error);
}

TEST_CASE("gateway records transcripts and sessions number requests") {
  TempDir tmp;
  auto clock = std::make_shared<VirtualClock>();
  auto be = testing::backend([](const CompletionRequest& r) {
    return std::string(r.prompt) + "#" + std::to_string(r.sample);
  });
  Gateway gw(be, clock, tmp / "t.jsonl");
  GatewaySession s(gw, "p1", GenParams{});
  CHECK(s.complete("hello").text == "hello#0");
  CHECK(s.complete("hello", 2).text == "hello#2");
  CHECK(s.request_ids() == std::vector<std::string>{"p1/0", "p1/1"});
  CHECK(gw.call_count() == 2);
  const auto ts = gw.transcripts();
  REQUIRE(ts.size() == 2);
  CHECK(ts[1].sample == 2);
  CHECK(ts[0].prompt_hash == sha256_hex("hello"));
  const std::string log = testing::read_file(tmp / "t.jsonl");
  CHECK(std::count(log.begin(), log.end(), '\n') == 2);
}

TEST_CASE("session numbering continues after resume") {
  auto clock = std::make_shared<VirtualClock>();
  Gateway gw(testing::backend([](const CompletionRequest&) { return "x"; }), clock);
  GatewaySession s(gw, "p", GenParams{});
  s.set_next_index(5);
  CHECK(s.complete("a").request_id == "p/5");
}

TEST_CASE("transcript json round trip") {
  Transcript t;
  t.request_id = "p/3";
  t.prompt = "line1\nline2 \"q\"";
  t.prompt_hash = sha256_hex(t.prompt);
  t.completion = "ℝ → ℝ";
  t.timestamp = "2026-01-01T00:00:00.000Z";
  t.backend = BackendKind::kReplay;
  t.sample = 4;
  t.params.model_name = "m";
  const Transcript u = transcript_from_json_line(transcript_to_json_line(t));
  CHECK(u.request_id == t.request_id);
  CHECK(u.prompt == t.prompt);
  CHECK(u.completion == t.completion);
  CHECK(u.params == t.params);
  CHECK(u.sample == 4);
  CHECK(u.backend == BackendKind::kReplay);
}

TEST_CASE("replay returns recorded completions and misses loudly") {
  TempDir tmp;
  auto clock = std::make_shared<VirtualClock>();
  int live_calls = 0;
  {
    Gateway gw(testing::backend([&](const CompletionRequest& r) {
                 ++live_calls;
                 return "reply to " + std::string(r.prompt) + " " + std::to_string(r.sample);
               }),
               clock, tmp / "rec.jsonl");
    GatewaySession s(gw, "p", GenParams{});
    s.complete("q1");
    s.complete("q1", 1);
    s.complete("q2");
  }
  auto replay = ReplayBackend::from_file(tmp / "rec.jsonl");
  CHECK(replay->size() == 3);
  auto run = [&] {
    Gateway gw(replay, std::make_shared<VirtualClock>());
    GatewaySession s(gw, "p", GenParams{});
    s.complete("q1");
    s.complete("q1", 1);
    s.complete("q2");
    return gw.transcripts();
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].completion == b[i].completion);
    CHECK(a[i].timestamp == b[i].timestamp);
  }
  CHECK(a[1].completion == "reply to q1 1");
  CompletionRequest miss{"q3", nullptr, 0};
  try {
    replay->complete(miss);
    FAIL("expected ReplayMiss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kReplayMiss);
  }
  CHECK(live_calls == 3);
}

TEST_CASE("gateway wall-clock ceiling raises a timeout") {
  auto clock = std::make_shared<SystemClock>();
  Gateway gw(testing::backend([](const CompletionRequest&) {
               std::this_thread::sleep_for(std::chrono::milliseconds(30));
               return std::string("late");
             }),
             clock);
  gw.set_timeout_seconds(0.001);
  GatewaySession s(gw, "p", GenParams{});
  try {
    s.complete("x");
    FAIL("expected Timeout");
  } catch (const GatewayError& e) {
    CHECK(e.code() == ErrorCode::kTimeout);
  }
}

}  // TEST_SUITE
