// Copyright 2026 The typecal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "typecal/type_vocab.h"

#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "test_util.h"
#include "typecal/error.h"

namespace typecal {
namespace {

using testing::RandomVocabulary;
using testing::VocabFromText;

std::vector<TokenId> Seq(std::initializer_list<TokenId> tokens) { return tokens; }

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInvalidArgument;
}

TEST_CASE("three lines load with ids in line order") {
  const TypeVocabulary vocab = VocabFromText("person\t1 2\nplace\t3\nevent\t4 5 6\n", 10);
  REQUIRE(vocab.size() == 3);
  CHECK(vocab.entry(0).name == "person");
  CHECK(vocab.entry(1).id == 1);
  CHECK(vocab.entry(2).tokens == Seq({4, 5, 6}));
  CHECK(vocab.Find("place") == 1);
  CHECK_FALSE(vocab.Find("thing").has_value());
  CHECK(vocab.eos_token() == 10);
  CHECK(vocab.max_type_length() == 3);
}

TEST_CASE("vocabulary errors carry codes and line numbers") {
  CHECK(CodeOf([] { VocabFromText("a\t1\na\t2\n", 10); }) == ErrorCode::kDuplicateType);
  CHECK(CodeOf([] { VocabFromText("a\t12\n", 10); }) == ErrorCode::kTokenOutOfRange);
  CHECK(CodeOf([] { VocabFromText("a\t1 2\nb\t1 2\n", 10); }) ==
        ErrorCode::kDuplicateSequence);
  CHECK(CodeOf([] { VocabFromText("a\t\n", 10); }) == ErrorCode::kEmptyType);
  CHECK(CodeOf([] { VocabFromText("a 1\n", 10); }) == ErrorCode::kFormatError);
  CHECK(CodeOf([] { VocabFromText("a\tx\n", 10); }) == ErrorCode::kFormatError);
  try {
    VocabFromText("a\t1\nb\t2\na\t3\n", 10);
    FAIL("expected DuplicateType");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("alphabet size is inferred from the largest token id") {
  const TypeVocabulary vocab = VocabFromText("a\t1\nb\t7 2\n", std::nullopt);
  CHECK(vocab.token_alphabet_size() == 8);
}

TEST_CASE("write and load round trip") {
  const TypeVocabulary vocab = VocabFromText("a\t1\nb\t7 2\n", 9);
  std::ostringstream out;
  WriteVocabulary(vocab, out);
  const TypeVocabulary again = VocabFromText(out.str(), 9);
  REQUIRE(again.size() == 2);
  CHECK(again.entry(1).tokens == Seq({7, 2}));
}

TEST_CASE("trie allowed continuations for nested types") {
  const TypeVocabulary vocab = VocabFromText("a\t1\nab\t1 2\n", 10);
  const PrefixTrie trie = PrefixTrie::Build(vocab);
  const TokenId eos = vocab.eos_token();
  CHECK(AllowedNext(trie, Seq({})) == Seq({1}));
  CHECK(AllowedNext(trie, Seq({1})) == Seq({2, eos}));
  CHECK(AllowedNext(trie, Seq({1, 2})) == Seq({eos}));
  CHECK(AllowedNext(trie, Seq({3})).empty());
  CHECK(AllowedNext(trie, Seq({1, 2, 5})).empty());
}

TEST_CASE("single path and empty vocabulary tries") {
  const TypeVocabulary one = VocabFromText("x\t7 8\n", 10);
  const PrefixTrie trie = PrefixTrie::Build(one);
  CHECK(AllowedNext(trie, Seq({7})) == Seq({8}));
  CHECK(AllowedNext(trie, Seq({7, 8})) == Seq({one.eos_token()}));

  const TypeVocabulary empty(10);
  CHECK(AllowedNext(PrefixTrie::Build(empty), Seq({})).empty());
}

// Brute force: the continuations of `prefix` read straight off the entries.
std::vector<TokenId> ScanAllowed(const TypeVocabulary& vocab,
                                 const std::vector<TokenId>& prefix) {
  std::set<TokenId> out;
  for (const TypeEntry& e : vocab.entries()) {
    if (e.tokens.size() < prefix.size()) continue;
    if (!std::equal(prefix.begin(), prefix.end(), e.tokens.begin())) continue;
    out.insert(e.tokens.size() == prefix.size() ? vocab.eos_token()
                                                : e.tokens[prefix.size()]);
  }
  return {out.begin(), out.end()};
}

TEST_CASE("trie agrees with a prefix scan on random vocabularies") {
  std::mt19937_64 rng(20261016);
  for (int trial = 0; trial < 200; ++trial) {
    const std::int32_t alphabet = 2 + static_cast<std::int32_t>(rng() % 6);
    const int types = 1 + static_cast<int>(rng() % 30);
    const TypeVocabulary vocab = RandomVocabulary(rng, types, alphabet, 4);
    const PrefixTrie trie = PrefixTrie::Build(vocab);
    for (const TypeEntry& e : vocab.entries()) {
      // Every proper prefix plus the full sequence.
      for (std::size_t k = 0; k <= e.tokens.size(); ++k) {
        const std::vector<TokenId> prefix(e.tokens.begin(), e.tokens.begin() + k);
        const auto allowed = AllowedNext(trie, prefix);
        REQUIRE(allowed == ScanAllowed(vocab, prefix));
        // Any other token leads off every vocabulary path.
        for (TokenId t = 0; t < alphabet; ++t) {
          if (std::binary_search(allowed.begin(), allowed.end(), t)) continue;
          std::vector<TokenId> off = prefix;
          off.push_back(t);
          CHECK(ScanAllowed(vocab, off).empty());
          CHECK(trie.Find(off) == PrefixTrie::kNoNode);
        }
      }
      const auto node = trie.Find(e.tokens);
      REQUIRE(node != PrefixTrie::kNoNode);
      CHECK(trie.TerminalType(node) == e.id);
    }
  }
}

TEST_CASE("trie cache round trip and corruption") {
  std::mt19937_64 rng(5);
  const TypeVocabulary vocab = RandomVocabulary(rng, 40, 9, 3);
  const PrefixTrie trie = PrefixTrie::Build(vocab);
  std::stringstream buffer;
  trie.Save(buffer);
  const PrefixTrie loaded = PrefixTrie::Load(buffer);
  CHECK(loaded == trie);

  std::string bytes;
  {
    std::ostringstream out;
    trie.Save(out);
    bytes = out.str();
  }
  std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK(CodeOf([&] { PrefixTrie::Load(truncated); }) == ErrorCode::kFormatError);
  std::istringstream garbage("not a trie at all");
  CHECK(CodeOf([&] { PrefixTrie::Load(garbage); }) == ErrorCode::kFormatError);
}

TEST_CASE("bucket examples") {
  CHECK(FrequencyBucket(0) == 0);
  CHECK(FrequencyBucket(1) == 1);
  CHECK(FrequencyBucket(7) == 3);
  CHECK(FrequencyBucket(8) == 4);
  CHECK(FrequencyBucket(100) == 7);
}

TEST_CASE("bucket is monotone and exact at powers of two") {
  for (int k = 0; k < 63; ++k) {
    const std::uint64_t n = (std::uint64_t{1} << k) - 1;
    CHECK(FrequencyBucket(n) == k);
    CHECK(FrequencyBucket(n + 1) == k + 1);
  }
  int previous = 0;
  for (std::uint64_t n = 0; n < 5000; ++n) {
    const int b = FrequencyBucket(n);
    CHECK(b >= previous);
    previous = b;
  }
}

std::vector<Example> Train(std::initializer_list<std::vector<std::string>> golds) {
  std::vector<Example> out;
  for (const auto& g : golds) {
    out.push_back({"e" + std::to_string(out.size()), "ctx", "m", g});
  }
  return out;
}

TEST_CASE("frequency table counts examples per type") {
  const TypeVocabulary vocab = VocabFromText("person\t1\nplace\t2\n", 5);
  {
    const auto built = BuildFrequencyTable({}, vocab);
    CHECK(built.table.count(0) == 0);
    CHECK(built.table.count(1) == 0);
    CHECK(built.table.num_groups() == 1);
  }
  {
    const auto built =
        BuildFrequencyTable(Train({{"person"}, {"place", "person"}, {"place"}}), vocab);
    CHECK(built.table.count(0) == 2);
    CHECK(built.table.bucket(0) == 2);
    CHECK(built.unknown_types.empty());
  }
  {
    const auto built =
        BuildFrequencyTable(Train({{"person", "robot"}, {"robot"}}), vocab);
    CHECK(built.table.count(0) == 1);
    REQUIRE(built.unknown_types.size() == 1);
    CHECK(built.unknown_types[0] == "robot");
    std::ostringstream report;
    WriteUnknownTypesReport(built.unknown_types, report);
    CHECK(report.str() == "robot\n");
  }
}

}  // namespace
}  // namespace typecal
