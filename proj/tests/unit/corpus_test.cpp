#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cgl/corpus.hpp"
#include "cgl/errors.hpp"

using namespace cgl;

namespace {

std::vector<LabeledPair> parse_pairs(const std::string& text, const ConceptStore& store) {
  std::istringstream in(text);
  return load_pairs_stream(in, store, "<test>");
}

ConceptStore parse_concepts(const std::string& text) {
  std::istringstream in(text);
  return load_concepts_stream(in, "<test>");
}

ConceptStore abc_store() {
  ConceptStore s;
  s.add("a", "one two");
  s.add("b", "three four");
  s.add("c", "five six");
  return s;
}

}  // namespace

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  CHECK(tokenize("Hello, World!") == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize("A-B_C") == std::vector<std::string>{"a", "b", "c"});
  CHECK(tokenize("covid19 2nd-wave") == std::vector<std::string>{"covid19", "2nd", "wave"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("  \t\n ") == std::vector<std::string>{});
}

TEST_CASE("tokenize emits each ideograph as its own token") {
  const auto t = tokenize("\xE6\x96\xB0\xE9\x97\xBBnews");
  REQUIRE(t.size() == 3);
  CHECK(t[0] == "\xE6\x96\xB0");
  CHECK(t[1] == "\xE9\x97\xBB");
  CHECK(t[2] == "news");
}

TEST_CASE("tokenize treats other non-ascii as separators") {
  CHECK(tokenize("caf\xC3\xA9 bar") == std::vector<std::string>{"caf", "bar"});
}

TEST_CASE("concept store rejects duplicates and unknown lookups") {
  ConceptStore s;
  s.add("x", "text here");
  CHECK_THROWS_AS(s.add("x", "other"), CglError);
  try {
    s.add("x", "other");
  } catch (const CglError& e) {
    CHECK(e.code() == Err::DuplicateConcept);
  }
  try {
    s.get("missing");
    FAIL("expected UnknownConcept");
  } catch (const CglError& e) {
    CHECK(e.code() == Err::UnknownConcept);
  }
  CHECK(s.get("x").tokens == std::vector<std::string>{"text", "here"});
}

TEST_CASE("load_concepts parses jsonl and flags bad rows") {
  auto s = parse_concepts(R"({"id": "a", "text": "Alpha"}
{"id": "b", "text": "Beta"})");
  CHECK(s.size() == 2);
  CHECK(s.get("a").tokens == std::vector<std::string>{"alpha"});

  CHECK_THROWS_AS(parse_concepts("not json"), CglError);
  CHECK_THROWS_AS(parse_concepts(R"({"id": "a"})"), CglError);
  CHECK_THROWS_AS(parse_concepts(R"({"id": 3, "text": "x"})"), CglError);
}

TEST_CASE("load_pairs validates ids, labels and self-pairs") {
  auto store = abc_store();
  auto pairs = parse_pairs(R"({"a": "a", "b": "b", "label": 1}
{"a": "b", "b": "c", "label": 0})", store);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].label == Label::related);
  CHECK(pairs[0].origin == Origin::annotated);
  CHECK(pairs[1].label == Label::unrelated);

  CHECK_THROWS_AS(parse_pairs(R"({"a": "a", "b": "zz", "label": 1})", store), CglError);
  CHECK_THROWS_AS(parse_pairs(R"({"a": "a", "b": "a", "label": 1})", store), CglError);
  CHECK_THROWS_AS(parse_pairs(R"({"a": "a", "b": "b", "label": 7})", store), CglError);
  CHECK_THROWS_AS(parse_pairs(R"({"a": "a", "b": "b"})", store), CglError);
}

TEST_CASE("pair files round-trip including origin") {
  auto store = abc_store();
  std::vector<LabeledPair> pairs{
      {"a", "b", Label::related, Origin::annotated},
      {"b", "c", Label::unrelated, Origin::augmented},
  };
  const auto path = std::filesystem::temp_directory_path() / "cgl_pairs_rt.jsonl";
  save_pairs(path.string(), pairs);
  auto back = load_pairs(path.string(), store);
  REQUIRE(back.size() == 2);
  CHECK(back[0].a_id == "a");
  CHECK(back[0].origin == Origin::annotated);
  CHECK(back[1].origin == Origin::augmented);
  CHECK(back[1].label == Label::unrelated);
  std::filesystem::remove(path);
}

TEST_CASE("split_dataset partitions deterministically") {
  std::vector<LabeledPair> pairs;
  ConceptStore store;
  for (int i = 0; i < 20; ++i) store.add("c" + std::to_string(i), "w" + std::to_string(i));
  for (int i = 0; i < 19; ++i) {
    pairs.push_back({"c" + std::to_string(i), "c" + std::to_string(i + 1),
                     i % 2 ? Label::related : Label::unrelated, Origin::annotated});
  }

  auto s1 = split_dataset(pairs, 0.8, 0.1, 0.1, 42);
  auto s2 = split_dataset(pairs, 0.8, 0.1, 0.1, 42);
  CHECK(s1.train.size() == s2.train.size());
  CHECK(s1.train.size() + s1.dev.size() + s1.test.size() == pairs.size());
  for (std::size_t i = 0; i < s1.train.size(); ++i) {
    CHECK(s1.train[i].a_id == s2.train[i].a_id);
    CHECK(s1.train[i].b_id == s2.train[i].b_id);
  }

  // every input pair lands in exactly one partition
  std::multiset<std::string> seen;
  for (const auto* part : {&s1.train, &s1.dev, &s1.test}) {
    for (const auto& p : *part) seen.insert(p.a_id + "|" + p.b_id);
  }
  std::multiset<std::string> want;
  for (const auto& p : pairs) want.insert(p.a_id + "|" + p.b_id);
  CHECK(seen == want);

  // sizes stay within one pair of the requested share
  CHECK(s1.train.size() >= 14);
  CHECK(s1.train.size() <= 16);

  auto s3 = split_dataset(pairs, 0.8, 0.1, 0.1, 43);
  bool same_order = s1.train.size() == s3.train.size();
  if (same_order) {
    same_order = std::equal(s1.train.begin(), s1.train.end(), s3.train.begin(),
                            [](const LabeledPair& x, const LabeledPair& y) {
                              return x.a_id == y.a_id && x.b_id == y.b_id;
                            });
  }
  CHECK_FALSE(same_order);
}

TEST_CASE("split_dataset rejects bad ratios and tiny inputs") {
  std::vector<LabeledPair> pairs{{"a", "b", Label::related, Origin::annotated},
                                 {"b", "c", Label::related, Origin::annotated}};
  CHECK_THROWS_AS(split_dataset(pairs, 0.8, 0.1, 0.1, 0), CglError);  // < 3 pairs
  pairs.push_back({"a", "c", Label::unrelated, Origin::annotated});
  CHECK_THROWS_AS(split_dataset(pairs, 0.9, 0.2, 0.1, 0), CglError);
  CHECK_THROWS_AS(split_dataset(pairs, 1.0, 0.0, 0.0, 0), CglError);
  CHECK_NOTHROW(split_dataset(pairs, 0.4, 0.3, 0.3, 0));
}
