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

#ifndef TYPECAL_TYPE_VOCAB_H_
#define TYPECAL_TYPE_VOCAB_H_

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "typecal/dataset.h"

namespace typecal {

using TokenId = std::int32_t;
using TypeId = std::int32_t;

struct TypeEntry {
  std::string name;
  std::vector<TokenId> tokens;
  TypeId id = 0;
};

// The closed set of types, each a non-empty token sequence over an alphabet
// of `token_alphabet_size` ids. The end-of-sequence marker is the id equal to
// the alphabet size, so it never collides with a type token.
class TypeVocabulary {
 public:
  explicit TypeVocabulary(std::int32_t token_alphabet_size);

  // Validates and builds a vocabulary; ids follow input order.
  static TypeVocabulary FromEntries(
      std::vector<std::pair<std::string, std::vector<TokenId>>> entries,
      std::int32_t token_alphabet_size);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<TypeEntry>& entries() const { return entries_; }
  const TypeEntry& entry(TypeId id) const { return entries_.at(id); }
  std::int32_t token_alphabet_size() const { return alphabet_size_; }
  TokenId eos_token() const { return alphabet_size_; }
  std::size_t max_type_length() const { return max_length_; }

  std::optional<TypeId> Find(const std::string& name) const;

 private:
  friend TypeVocabulary LoadVocabulary(std::istream&, std::optional<std::int32_t>);
  void Add(std::string name, std::vector<TokenId> tokens, std::size_t line);

  std::int32_t alphabet_size_;
  std::size_t max_length_ = 0;
  std::vector<TypeEntry> entries_;
  std::unordered_map<std::string, TypeId> by_name_;
};

// Reads `name<TAB>id id id` lines. Errors carry the 1-based line number.
// When `token_alphabet_size` is empty it is inferred as max token id + 1.
TypeVocabulary LoadVocabulary(std::istream& in,
                              std::optional<std::int32_t> token_alphabet_size);
TypeVocabulary LoadVocabularyFile(
    const std::string& path, std::optional<std::int32_t> token_alphabet_size);

void WriteVocabulary(const TypeVocabulary& vocab, std::ostream& out);

// Prefix trie over the vocabulary's token sequences. A node whose prefix is a
// complete type allows the eos token alongside any longer continuations.
class PrefixTrie {
 public:
  using NodeId = std::int32_t;
  static constexpr NodeId kRoot = 0;
  static constexpr NodeId kNoNode = -1;
  static constexpr TypeId kNoType = -1;

  static PrefixTrie Build(const TypeVocabulary& vocab);

  NodeId Child(NodeId node, TokenId token) const;
  NodeId Find(std::span<const TokenId> prefix) const;

  // Sorted ascending, so eos (the largest id) comes last when present.
  std::vector<TokenId> AllowedAt(NodeId node) const;
  std::vector<TokenId> AllowedNext(std::span<const TokenId> prefix) const;

  // kNoType unless the node's prefix spells a complete type.
  TypeId TerminalType(NodeId node) const { return nodes_.at(node).terminal; }

  TokenId eos_token() const { return eos_; }
  std::size_t num_nodes() const { return nodes_.size(); }

  // Compact little-endian binary cache.
  void Save(std::ostream& out) const;
  static PrefixTrie Load(std::istream& in);

  bool operator==(const PrefixTrie&) const = default;

 private:
  struct Node {
    std::vector<std::pair<TokenId, NodeId>> children;  // Sorted by token.
    TypeId terminal = kNoType;
    bool operator==(const Node&) const = default;
  };

  std::vector<Node> nodes_;
  TokenId eos_ = 0;
};

inline std::vector<TokenId> AllowedNext(const PrefixTrie& trie,
                                        std::span<const TokenId> prefix) {
  return trie.AllowedNext(prefix);
}

// ceil(log2(freq + 1)), i.e. the bit length of freq.
int FrequencyBucket(std::uint64_t freq);

class FrequencyTable {
 public:
  FrequencyTable() = default;
  explicit FrequencyTable(std::vector<std::int64_t> counts);

  std::int64_t count(TypeId id) const;
  std::size_t size() const { return counts_.size(); }
  int bucket(TypeId id) const;
  std::int64_t max_count() const;
  // 1 + the largest bucket over all types.
  int num_groups() const;

 private:
  std::vector<std::int64_t> counts_;
};

struct FrequencyBuildResult {
  FrequencyTable table;
  // Distinct gold type names not in the vocabulary, first-seen order.
  std::vector<std::string> unknown_types;
};

// counts[t] = number of examples whose gold set contains t.
FrequencyBuildResult BuildFrequencyTable(const std::vector<Example>& train,
                                         const TypeVocabulary& vocab);

void WriteUnknownTypesReport(const std::vector<std::string>& unknown,
                             std::ostream& out);

}  // namespace typecal

#endif  // TYPECAL_TYPE_VOCAB_H_
