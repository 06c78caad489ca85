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

#include "typecal/dataset.h"

#include <fstream>
#include <unordered_set>

#include "json.hpp"
#include "typecal/error.h"

namespace typecal {

std::vector<Example> LoadExamples(std::istream& in) {
  std::vector<Example> examples;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    Example ex;
    try {
      const auto j = nlohmann::json::parse(line);
      ex.id = j.at("id").get<std::string>();
      ex.context = j.value("context", std::string());
      ex.mention = j.value("mention", std::string());
      std::unordered_set<std::string> seen;
      for (const auto& t : j.value("gold_types", nlohmann::json::array())) {
        auto name = t.get<std::string>();
        if (seen.insert(name).second) ex.gold_types.push_back(std::move(name));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormatError, where + e.what());
    }
    if (!ids.insert(ex.id).second) {
      throw Error(ErrorCode::kFormatError, where + "duplicate id " + ex.id);
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

std::vector<Example> LoadExamplesFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return LoadExamples(in);
}

void WriteExamples(const std::vector<Example>& examples, std::ostream& out) {
  for (const Example& ex : examples) {
    nlohmann::ordered_json j;
    j["id"] = ex.id;
    j["context"] = ex.context;
    j["mention"] = ex.mention;
    j["gold_types"] = ex.gold_types;
    out << j.dump() << '\n';
  }
}

}  // namespace typecal
