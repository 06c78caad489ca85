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

#include <sstream>

#include "doctest.h"
#include "typecal/error.h"

namespace typecal {
namespace {

std::vector<Example> Parse(const std::string& text) {
  std::istringstream in(text);
  return LoadExamples(in);
}

TEST_CASE("examples load with deduplicated gold sets") {
  const auto examples = Parse(
      R"({"id":"a","context":"he met <m> Ada </m>","mention":"Ada","gold_types":["person","person","writer"]})"
      "\n\n"
      R"({"id":"b","context":"x","mention":"y","gold_types":[]})"
      "\n");
  REQUIRE(examples.size() == 2);
  CHECK(examples[0].gold_types == std::vector<std::string>{"person", "writer"});
  CHECK(examples[0].mention == "Ada");
  CHECK(examples[1].gold_types.empty());
}

TEST_CASE("malformed and duplicate lines report the line") {
  try {
    Parse("{\"id\":\"a\"}\n{\"id\":\"a\"}\n");
    FAIL("expected FormatError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFormatError);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(Parse("{not json\n"), Error);
  CHECK_THROWS_AS(Parse("{\"context\":\"no id\"}\n"), Error);
  CHECK_THROWS_AS(Parse("{\"id\":\"a\",\"gold_types\":[3]}\n"), Error);
}

TEST_CASE("write and load round trip") {
  const std::vector<Example> examples = {
      {"x1", "a <m> b </m> c", "b", {"t1", "t2"}},
      {"x2", "quote \" and \\ slash", "m", {}},
  };
  std::ostringstream out;
  WriteExamples(examples, out);
  const auto again = Parse(out.str());
  REQUIRE(again.size() == 2);
  CHECK(again[0].gold_types == examples[0].gold_types);
  CHECK(again[1].context == examples[1].context);
}

}  // namespace
}  // namespace typecal
