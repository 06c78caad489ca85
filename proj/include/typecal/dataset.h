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

#ifndef TYPECAL_DATASET_H_
#define TYPECAL_DATASET_H_

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace typecal {

// An entity mention in context. The mention span inside `context` is marked
// with kMentionOpen / kMentionClose; rendering a model input is the scorer
// backend's job.
struct Example {
  std::string id;
  std::string context;
  std::string mention;
  std::vector<std::string> gold_types;  // Set semantics, first-seen order.
};

inline constexpr char kMentionOpen[] = "<m>";
inline constexpr char kMentionClose[] = "</m>";

// Newline-delimited JSON, one object per line:
//   {"id": "...", "context": "...", "mention": "...", "gold_types": [...]}
// Blank lines are skipped. Duplicate ids and malformed lines raise
// kFormatError with the line number.
std::vector<Example> LoadExamples(std::istream& in);
std::vector<Example> LoadExamplesFile(const std::string& path);

void WriteExamples(const std::vector<Example>& examples, std::ostream& out);

}  // namespace typecal

#endif  // TYPECAL_DATASET_H_
