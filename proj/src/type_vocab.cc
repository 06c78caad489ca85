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

#include <algorithm>
#include <bit>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "typecal/error.h"

namespace typecal {
namespace {

std::string AtLine(std::size_t line) {
  return line == 0 ? std::string() : "line " + std::to_string(line) + ": ";
}

struct RawEntry {
  std::string name;
  std::vector<std::int64_t> tokens;
  std::size_t line;
};

RawEntry ParseVocabLine(std::string_view text, std::size_t line) {
  const auto tab = text.find('\t');
  if (tab == std::string_view::npos) {
    throw Error(ErrorCode::kFormatError,
                AtLine(line) + "expected name<TAB>token ids");
  }
  RawEntry raw{std::string(text.substr(0, tab)), {}, line};
  if (raw.name.empty()) {
    throw Error(ErrorCode::kFormatError, AtLine(line) + "empty type name");
  }
  std::string_view rest = text.substr(tab + 1);
  std::size_t pos = 0;
  while (pos < rest.size()) {
    if (rest[pos] == ' ' || rest[pos] == '\t') {
      ++pos;
      continue;
    }
    std::size_t end = rest.find_first_of(" \t", pos);
    if (end == std::string_view::npos) end = rest.size();
    const std::string_view field = rest.substr(pos, end - pos);
    std::int64_t value = 0;
    const auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw Error(ErrorCode::kFormatError,
                  AtLine(line) + "bad token id '" + std::string(field) + "'");
    }
    raw.tokens.push_back(value);
    pos = end;
  }
  return raw;
}

template <typename T>
void WriteLe(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadLe(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorCode::kFormatError, "truncated trie cache");
  return value;
}

constexpr char kTrieMagic[8] = {'T', 'C', 'T', 'R', 'I', 'E', '0', '1'};

}  // namespace

TypeVocabulary::TypeVocabulary(std::int32_t token_alphabet_size)
    : alphabet_size_(token_alphabet_size) {
  if (token_alphabet_size < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative token alphabet size");
  }
}

void TypeVocabulary::Add(std::string name, std::vector<TokenId> tokens,
                         std::size_t line) {
  if (tokens.empty()) {
    throw Error(ErrorCode::kEmptyType, AtLine(line) + "type '" + name +
                                           "' has no tokens");
  }
  if (by_name_.count(name) != 0) {
    throw Error(ErrorCode::kDuplicateType,
                AtLine(line) + "duplicate type name '" + name + "'");
  }
  const auto id = static_cast<TypeId>(entries_.size());
  by_name_.emplace(name, id);
  max_length_ = std::max(max_length_, tokens.size());
  entries_.push_back(TypeEntry{std::move(name), std::move(tokens), id});
}

TypeVocabulary TypeVocabulary::FromEntries(
    std::vector<std::pair<std::string, std::vector<TokenId>>> entries,
    std::int32_t token_alphabet_size) {
  TypeVocabulary vocab(token_alphabet_size);
  std::set<std::vector<TokenId>> sequences;
  for (auto& [name, tokens] : entries) {
    for (TokenId token : tokens) {
      if (token < 0 || token >= token_alphabet_size) {
        throw Error(ErrorCode::kTokenOutOfRange,
                    "type '" + name + "' token " + std::to_string(token) +
                        " outside alphabet of size " +
                        std::to_string(token_alphabet_size));
      }
    }
    if (!tokens.empty() && !sequences.insert(tokens).second) {
      throw Error(ErrorCode::kDuplicateSequence,
                  "type '" + name + "' repeats an existing token sequence");
    }
    vocab.Add(std::move(name), std::move(tokens), 0);
  }
  return vocab;
}

std::optional<TypeId> TypeVocabulary::Find(const std::string& name) const {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

TypeVocabulary LoadVocabulary(std::istream& in,
                              std::optional<std::int32_t> token_alphabet_size) {
  std::vector<RawEntry> raw;
  std::string line;
  std::size_t line_no = 0;
  std::int64_t max_token = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    raw.push_back(ParseVocabLine(line, line_no));
    for (std::int64_t t : raw.back().tokens) max_token = std::max(max_token, t);
  }
  const std::int64_t alphabet =
      token_alphabet_size ? *token_alphabet_size : max_token + 1;

  TypeVocabulary vocab(static_cast<std::int32_t>(alphabet));
  std::map<std::vector<TokenId>, std::size_t> sequences;
  for (RawEntry& entry : raw) {
    std::vector<TokenId> tokens;
    tokens.reserve(entry.tokens.size());
    for (std::int64_t t : entry.tokens) {
      if (t < 0 || t >= alphabet) {
        throw Error(ErrorCode::kTokenOutOfRange,
                    AtLine(entry.line) + "token " + std::to_string(t) +
                        " outside alphabet of size " +
                        std::to_string(alphabet));
      }
      tokens.push_back(static_cast<TokenId>(t));
    }
    if (!tokens.empty()) {
      const auto [it, inserted] = sequences.emplace(tokens, entry.line);
      if (!inserted) {
        throw Error(ErrorCode::kDuplicateSequence,
                    AtLine(entry.line) + "type '" + entry.name +
                        "' repeats the token sequence of line " +
                        std::to_string(it->second));
      }
    }
    vocab.Add(std::move(entry.name), std::move(tokens), entry.line);
  }
  return vocab;
}

TypeVocabulary LoadVocabularyFile(
    const std::string& path, std::optional<std::int32_t> token_alphabet_size) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open vocabulary " + path);
  return LoadVocabulary(in, token_alphabet_size);
}

void WriteVocabulary(const TypeVocabulary& vocab, std::ostream& out) {
  for (const TypeEntry& entry : vocab.entries()) {
    out << entry.name << '\t';
    for (std::size_t i = 0; i < entry.tokens.size(); ++i) {
      if (i > 0) out << ' ';
      out << entry.tokens[i];
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// PrefixTrie

PrefixTrie PrefixTrie::Build(const TypeVocabulary& vocab) {
  PrefixTrie trie;
  trie.eos_ = vocab.eos_token();
  trie.nodes_.emplace_back();
  for (const TypeEntry& entry : vocab.entries()) {
    NodeId node = kRoot;
    for (TokenId token : entry.tokens) {
      auto& children = trie.nodes_[node].children;
      auto it = std::lower_bound(
          children.begin(), children.end(), token,
          [](const auto& child, TokenId t) { return child.first < t; });
      if (it != children.end() && it->first == token) {
        node = it->second;
        continue;
      }
      const auto next = static_cast<NodeId>(trie.nodes_.size());
      children.insert(it, {token, next});
      trie.nodes_.emplace_back();
      node = next;
    }
    trie.nodes_[node].terminal = entry.id;
  }
  return trie;
}

PrefixTrie::NodeId PrefixTrie::Child(NodeId node, TokenId token) const {
  if (node < 0 || static_cast<std::size_t>(node) >= nodes_.size()) {
    return kNoNode;
  }
  const auto& children = nodes_[node].children;
  auto it = std::lower_bound(
      children.begin(), children.end(), token,
      [](const auto& child, TokenId t) { return child.first < t; });
  if (it == children.end() || it->first != token) return kNoNode;
  return it->second;
}

PrefixTrie::NodeId PrefixTrie::Find(std::span<const TokenId> prefix) const {
  NodeId node = kRoot;
  for (TokenId token : prefix) {
    node = Child(node, token);
    if (node == kNoNode) return kNoNode;
  }
  return node;
}

std::vector<TokenId> PrefixTrie::AllowedAt(NodeId node) const {
  std::vector<TokenId> allowed;
  if (node < 0 || static_cast<std::size_t>(node) >= nodes_.size()) {
    return allowed;
  }
  const Node& n = nodes_[node];
  allowed.reserve(n.children.size() + 1);
  for (const auto& [token, child] : n.children) allowed.push_back(token);
  if (n.terminal != kNoType) allowed.push_back(eos_);
  return allowed;
}

std::vector<TokenId> PrefixTrie::AllowedNext(
    std::span<const TokenId> prefix) const {
  return AllowedAt(Find(prefix));
}

void PrefixTrie::Save(std::ostream& out) const {
  out.write(kTrieMagic, sizeof(kTrieMagic));
  WriteLe<std::int32_t>(out, eos_);
  WriteLe<std::int32_t>(out, static_cast<std::int32_t>(nodes_.size()));
  for (const Node& node : nodes_) {
    WriteLe<std::int32_t>(out, node.terminal);
    WriteLe<std::int32_t>(out, static_cast<std::int32_t>(node.children.size()));
    for (const auto& [token, child] : node.children) {
      WriteLe<std::int32_t>(out, token);
      WriteLe<std::int32_t>(out, child);
    }
  }
}

PrefixTrie PrefixTrie::Load(std::istream& in) {
  char magic[sizeof(kTrieMagic)];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + sizeof(magic), kTrieMagic)) {
    throw Error(ErrorCode::kFormatError, "not a trie cache");
  }
  PrefixTrie trie;
  trie.eos_ = ReadLe<std::int32_t>(in);
  const auto n = ReadLe<std::int32_t>(in);
  if (n <= 0) throw Error(ErrorCode::kFormatError, "trie cache has no root");
  trie.nodes_.resize(n);
  for (Node& node : trie.nodes_) {
    node.terminal = ReadLe<std::int32_t>(in);
    const auto k = ReadLe<std::int32_t>(in);
    if (k < 0 || k > n) throw Error(ErrorCode::kFormatError, "bad fan-out");
    node.children.resize(k);
    for (auto& [token, child] : node.children) {
      token = ReadLe<std::int32_t>(in);
      child = ReadLe<std::int32_t>(in);
      if (child <= 0 || child >= n) {
        throw Error(ErrorCode::kFormatError, "child index out of range");
      }
    }
  }
  return trie;
}

// ---------------------------------------------------------------------------
// Frequencies

int FrequencyBucket(std::uint64_t freq) { return std::bit_width(freq); }

FrequencyTable::FrequencyTable(std::vector<std::int64_t> counts)
    : counts_(std::move(counts)) {
  for (std::int64_t c : counts_) {
    if (c < 0) throw Error(ErrorCode::kInvalidArgument, "negative count");
  }
}

std::int64_t FrequencyTable::count(TypeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= counts_.size()) return 0;
  return counts_[id];
}

int FrequencyTable::bucket(TypeId id) const {
  return FrequencyBucket(static_cast<std::uint64_t>(count(id)));
}

std::int64_t FrequencyTable::max_count() const {
  return counts_.empty() ? 0 : *std::max_element(counts_.begin(), counts_.end());
}

int FrequencyTable::num_groups() const {
  return 1 + FrequencyBucket(static_cast<std::uint64_t>(max_count()));
}

FrequencyBuildResult BuildFrequencyTable(const std::vector<Example>& train,
                                         const TypeVocabulary& vocab) {
  std::vector<std::int64_t> counts(vocab.size(), 0);
  std::vector<std::string> unknown;
  std::unordered_set<std::string> unknown_seen;
  std::vector<TypeId> seen_in_example;
  for (const Example& example : train) {
    seen_in_example.clear();
    for (const std::string& name : example.gold_types) {
      const auto id = vocab.Find(name);
      if (!id) {
        if (unknown_seen.insert(name).second) unknown.push_back(name);
        continue;
      }
      if (std::find(seen_in_example.begin(), seen_in_example.end(), *id) ==
          seen_in_example.end()) {
        seen_in_example.push_back(*id);
        ++counts[*id];
      }
    }
  }
  return {FrequencyTable(std::move(counts)), std::move(unknown)};
}

void WriteUnknownTypesReport(const std::vector<std::string>& unknown,
                             std::ostream& out) {
  for (const std::string& name : unknown) out << name << '\n';
}

}  // namespace typecal
