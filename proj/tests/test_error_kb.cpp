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
#include <tuple>

#include "leaninst/error_kb.hpp"
#include <json.hpp>

#include "leaninst/text.hpp"
#include "support.hpp"

using namespace leaninst;

namespace {

KBEntry entry(ErrorKind kind, std::string message) {
  KBEntry e;
  e.kind = kind;
  e.message = std::move(message);
  e.faulty_snippet = "a";
  e.fixed_snippet = "b";
  e.explanation = {"t", "r", "f", "w"};
  return e;
}

// Independent Jaccard: split on non-alphanumerics, mask, compare sets.
double jaccard_oracle(const std::string& a, const std::string& b) {
  auto toks = [](const std::string& s) {
    std::set<std::string> out;
    std::string cur;
    auto flush = [&] {
      if (cur.empty()) return;
      if (std::all_of(cur.begin(), cur.end(), ::isdigit)) {
        out.insert("<n>");
      } else if (cur.size() == 1) {
        out.insert("<v>");
      } else {
        out.insert(cur);
      }
      cur.clear();
    };
    for (unsigned char c : s) {
      if (std::isalnum(c)) {
        cur += static_cast<char>(std::tolower(c));
      } else {
        flush();
      }
    }
    flush();
    return out;
  };
  const auto x = toks(a), y = toks(b);
  if (x.empty() && y.empty()) return 1.0;
  std::vector<std::string> inter, uni;
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(inter));
  std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(uni));
  return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

std::shared_ptr<VirtualClock> vclock() { return std::make_shared<VirtualClock>(); }

}  // namespace

TEST_SUITE("error_kb") {

TEST_CASE("similarity examples") {
  CHECK(similarity("unknown identifier foo", "unknown identifier foo") == 1.0);
  CHECK(similarity("alpha beta", "gamma delta") == 0.0);
  CHECK(similarity("type mismatch at x", "type mismatch at y") == 1.0);
  CHECK(masked_tokens("type mismatch at x") ==
        std::set<std::string>{"type", "mismatch", "at", "<v>"});
  CHECK(similarity("", "") == 1.0);
  CHECK(similarity("line 12 col 4", "line 7 col 9") == 1.0);
}

TEST_CASE("similarity agrees with an independent oracle and is symmetric") {
  testing::Rng rng(5);
  const std::vector<std::string> words = {"type", "mismatch", "x", "y", "12", "7", "unknown",
                                          "identifier", "'foo'", "failed", "to", "synthesize",
                                          "HSub", "(", ")", "ℝ", "expected", "term"};
  for (int i = 0; i < 300; ++i) {
    std::string a, b;
    for (int k = rng.below(8); k > 0; --k) a += words[rng.below(static_cast<int>(words.size()))] + " ";
    for (int k = rng.below(8); k > 0; --k) b += words[rng.below(static_cast<int>(words.size()))] + " ";
    const double s = similarity(a, b);
    CHECK(s == doctest::Approx(jaccard_oracle(a, b)));
    CHECK(s == similarity(b, a));
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("retrieval respects k and orders scores") {
  ErrorKB kb(vclock());
  CHECK(kb.retrieve("anything", 3).entries.empty());
  for (int i = 0; i < 5; ++i) kb.add(entry(ErrorKind::kSyntaxError, "expected token " + std::to_string(i)));
  const auto r = kb.retrieve("expected token", 3);
  CHECK(r.entries.size() == 3);
  for (std::size_t i = 1; i < r.entries.size(); ++i) CHECK(r.entries[i - 1].score >= r.entries[i].score);
  // Equal similarity: newer ids first.
  CHECK(r.ids() == std::vector<std::int64_t>{5, 4, 3});
  CHECK(kb.get(5)->use_count == 1);
  CHECK(kb.get(1)->use_count == 0);
}

TEST_CASE("same kind ranks first regardless of similarity") {
  ErrorKB kb(vclock());
  kb.add(entry(ErrorKind::kTypeMismatch, "type mismatch somewhere else entirely"));
  for (int i = 0; i < 4; ++i) kb.add(entry(ErrorKind::kSyntaxError, "expected term mismatch query"));
  const std::string q = "type mismatch: expected term mismatch query";
  REQUIRE(normalize_error(q) == ErrorKind::kTypeMismatch);
  const auto r = kb.peek(q, 5);
  REQUIRE(r.entries.size() == 5);
  // Brute force over all 5 by the stated key.
  auto all = kb.snapshot();
  std::sort(all.begin(), all.end(), [&](const KBEntry& a, const KBEntry& b) {
    auto key = [&](const KBEntry& e) {
      return std::make_tuple(e.kind == ErrorKind::kTypeMismatch ? 1 : 0, similarity(q, e.message), e.id);
    };
    return key(a) > key(b);
  });
  std::vector<std::int64_t> expect;
  for (const auto& e : all) expect.push_back(e.id);
  CHECK(r.ids() == expect);
  CHECK(r.ids().front() == 1);
  CHECK(similarity(q, kb.get(1)->message) < similarity(q, kb.get(2)->message));
}

TEST_CASE("retrieval is deterministic and matches brute force on the seed") {
  ErrorKB kb(vclock());
  kb.import_seed(testing::assets_dir() / "kb", nullptr);
  const auto corpus = testing::read_file(testing::assets_dir() / "errors" / "corpus.jsonl");
  int checked = 0;
  for (auto line : text::split_lines(corpus)) {
    if (checked++ > 25) break;
    const std::string q = nlohmann::json::parse(line).at("message").get<std::string>();
    const auto a = kb.peek(q, 3);
    const auto b = kb.peek(q, 3);
    CHECK(a.ids() == b.ids());
    const ErrorKind qk = normalize_error(q);
    auto all = kb.snapshot();
    std::stable_sort(all.begin(), all.end(), [&](const KBEntry& x, const KBEntry& y) {
      auto key = [&](const KBEntry& e) {
        return std::make_tuple(e.kind == qk ? 1 : 0, similarity(q, e.message), e.id);
      };
      return key(x) > key(y);
    });
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(a.entries[i].entry.id == all[i].id);
      const double expect = 0.5 * (all[i].kind == qk ? 1 : 0) + 0.5 * similarity(q, all[i].message);
      CHECK(a.entries[i].score == doctest::Approx(expect));
    }
  }
}

TEST_CASE("explanations parse into four parts") {
  const auto e = parse_explanation("Error Type: Syntax error\nRoot Cause: R\nFix Description: F\nWhy It Works: W");
  REQUIRE(e.has_value());
  CHECK(*e == Explanation{"Syntax error", "R", "F", "W"});
  CHECK_FALSE(parse_explanation("Error Type: a\nRoot Cause: b\nFix Description: c\n").has_value());
}

TEST_CASE("record_fix stores parsed and unparsed explanations") {
  testing::TempDir tmp;
  const auto prompts = testing::shipped_prompts();
  std::string reply = "Error Type: Syntax error\nRoot Cause: R\nFix Description: F\nWhy It Works: W";
  Gateway gw(testing::backend([&](const CompletionRequest&) { return reply; }), vclock());
  GatewaySession s(gw, "kb", GenParams{});
  ErrorKB kb(vclock());
  kb.attach(tmp / "kb.jsonl");
  const auto a = kb.record_fix("unexpected token 'def'; expected ')'", "x (", "x ()", s, prompts);
  CHECK(a.explanation == Explanation{"Syntax error", "R", "F", "W"});
  CHECK(a.kind == ErrorKind::kUnexpectedToken);

  reply = "Error Type: X\nRoot Cause: Y\nFix Description: Z";
  const auto b = kb.record_fix("expected term", "f", "g", s, prompts);
  CHECK(b.explanation.fix_description == reply);
  CHECK(b.explanation.error_type == "unparsed");
  CHECK(b.explanation.why_it_works == "unparsed");

  const auto c = kb.record_fix(
      "failed to synthesize\n  HSub (Fin m → ℝ) (EuclideanSpace ℝ (Fin m)) ?m.7571", "A *ᵥ x - b",
      "(WithLp.equiv 2 _).symm (A *ᵥ x) - b", s, prompts);
  CHECK(c.kind == ErrorKind::kFailedToSynthesize);
  CHECK(kb.get(1) == a);
  CHECK(kb.size() == 3);
  CHECK(gw.call_count() == 3);

  ErrorKB reloaded;
  reloaded.load(tmp / "kb.jsonl", nullptr);
  CHECK(reloaded.snapshot() == kb.snapshot());
}

TEST_CASE("persist and load round trip") {
  testing::TempDir tmp;
  ErrorKB empty(vclock());
  empty.persist(tmp / "e.jsonl");
  ErrorKB e2;
  e2.load(tmp / "e.jsonl", nullptr);
  CHECK(e2.size() == 0);

  ErrorKB seed(vclock());
  std::vector<CorruptLine> bad;
  CHECK(seed.import_seed(testing::assets_dir() / "kb", &bad) == 75);
  CHECK(bad.empty());
  seed.persist(tmp / "seed.jsonl");
  ErrorKB back;
  back.load(tmp / "seed.jsonl", &bad);
  CHECK(bad.empty());
  CHECK(back.snapshot() == seed.snapshot());
}

TEST_CASE("a corrupt line is skipped and reported") {
  testing::TempDir tmp;
  const std::string good1 = kb_entry_to_json_line([] {
    auto e = entry(ErrorKind::kSyntaxError, "expected term");
    e.id = 1;
    return e;
  }());
  const std::string good2 = kb_entry_to_json_line([] {
    auto e = entry(ErrorKind::kNoGoals, "no goals to be proved");
    e.id = 2;
    return e;
  }());
  testing::write_file(tmp / "kb.jsonl", good1 + "\n{\"id\": oops\n" + good2 + "\n");
  ErrorKB kb;
  std::vector<CorruptLine> bad;
  kb.load(tmp / "kb.jsonl", &bad);
  CHECK(kb.size() == 2);
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].line_no == 2);
}

TEST_CASE("seed histogram matches the published frequencies") {
  ErrorKB kb(vclock());
  kb.import_seed(testing::assets_dir() / "kb", nullptr);
  const auto h = kb.histogram();
  const std::map<ErrorKind, int> expect = {
      {ErrorKind::kSyntaxError, 21},       {ErrorKind::kTypeMismatch, 19},
      {ErrorKind::kFailedToSynthesize, 7}, {ErrorKind::kInvalidField, 7},
      {ErrorKind::kUnknownIdentifier, 7},  {ErrorKind::kUnexpectedToken, 4},
      {ErrorKind::kUnknownConstant, 2},    {ErrorKind::kUnclassified, 2},
      {ErrorKind::kMissingDefinition, 2},  {ErrorKind::kTimeout, 1},
      {ErrorKind::kNoGoals, 1},            {ErrorKind::kApplyFailed, 1},
      {ErrorKind::kIncompleteProof, 1}};
  CHECK(h == expect);
  for (const auto& e : kb.snapshot()) {
    CHECK(e.kind == normalize_error(e.message));
    CHECK(e.origin.has_value());
    CHECK_FALSE(e.explanation.why_it_works.empty());
  }
}

TEST_CASE("record_fix never touches prior entries") {
  ErrorKB kb(vclock());
  kb.import_seed(testing::assets_dir() / "kb", nullptr);
  const auto before = kb.snapshot();
  Gateway gw(testing::backend([](const CompletionRequest&) { return std::string("nonsense"); }), vclock());
  GatewaySession s(gw, "kb", GenParams{});
  const auto prompts = testing::shipped_prompts();
  for (int i = 0; i < 5; ++i) kb.record_fix("expected term", "a", "b" + std::to_string(i), s, prompts);
  const auto after = kb.snapshot();
  REQUIRE(after.size() == before.size() + 5);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i] == before[i]);
  for (std::size_t i = 1; i < after.size(); ++i) CHECK(after[i].id > after[i - 1].id);
}

}  // TEST_SUITE
