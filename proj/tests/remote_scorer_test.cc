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

#include "typecal/remote_scorer.h"

#include <functional>
#include <random>
#include <thread>

#include "doctest.h"
#include "json.hpp"
#include "test_util.h"
#include "typecal/decoder.h"
#include "typecal/error.h"
#include "typecal/toy_scorer.h"

namespace typecal {
namespace {

using nlohmann::json;
using testing::RandomVocabulary;

// Serves one connection on a loopback port. `handler` maps each request line
// after the handshake to a reply line; an empty reply closes the connection.
class FakeServer {
 public:
  FakeServer(int hello_version, std::function<std::string(const json&)> handler)
      : listener_(ListenTcp(0)) {
    thread_ = std::thread([this, hello_version, handler] {
      LineSocket conn = listener_.Accept();
      const auto hello = conn.ReadLine();
      if (!hello) return;
      conn.SendLine(json{{"hello", hello_version}}.dump());
      while (const auto line = conn.ReadLine()) {
        const std::string reply = handler(json::parse(*line));
        if (reply.empty()) return;
        conn.SendLine(reply);
      }
    });
  }
  ~FakeServer() { thread_.join(); }

  std::string endpoint() const { return "127.0.0.1:" + std::to_string(listener_.port); }

 private:
  TcpListener listener_;
  std::thread thread_;
};

json DistJson(const TokenDistribution& dist) {
  json out = json::object();
  const auto eos = static_cast<TokenId>(dist.size() - 1);
  for (TokenId t = 0; t <= eos; ++t) {
    out[t == eos ? "EOS" : std::to_string(t)] = dist[t];
  }
  return out;
}

TEST_CASE("remote scoring matches the served scorer") {
  std::mt19937_64 rng(2);
  const TypeVocabulary vocab = RandomVocabulary(rng, 20, 5, 3);
  const PrefixTrie trie = PrefixTrie::Build(vocab);
  ToyScorer served(vocab, 31);
  std::size_t requests = 0;
  FakeServer server(kProtocolVersion, [&](const json& request) {
    ++requests;
    const ScorerContext ctx =
        request.at("ctx").is_null()
            ? ScorerContext::Empty()
            : ScorerContext::FromText(request.at("ctx").get<std::string>(), "remote");
    json dists = json::array();
    for (const auto& prefix : request.at("prefixes")) {
      const auto tokens = prefix.get<std::vector<TokenId>>();
      dists.push_back(DistJson(served.NextTokenLogprobs(ctx, tokens)));
    }
    return json{{"id", request.at("id")}, {"dists", dists}}.dump();
  });

  RemoteScorer remote(server.endpoint(), vocab.token_alphabet_size());
  ToyScorer local(vocab, 31);
  const auto ctx = ScorerContext::FromText(vocab.entry(4).name, "local-key");
  DecoderConfig config;
  config.beam_size = 6;
  const auto a = BeamSearch(remote, trie, vocab, ctx, config);
  const auto b = BeamSearch(local, trie, vocab, ctx, config);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].type_id == b[i].type_id);
    CHECK(a[i].mean_logprob == b[i].mean_logprob);
    CHECK(a[i].bias_logprob == b[i].bias_logprob);
  }
  CHECK(requests > 0);
}

TEST_CASE("handshake version mismatch names both versions") {
  FakeServer server(kProtocolVersion + 1, [](const json&) { return std::string(); });
  try {
    RemoteScorer remote(server.endpoint(), 4);
    FAIL("expected ScorerUnavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kScorerUnavailable);
    CHECK(std::string(e.what()).find("version mismatch: client 1, server 2") !=
          std::string::npos);
  }
}

TEST_CASE("server errors and disconnects surface as ScorerUnavailable") {
  {
    FakeServer server(kProtocolVersion, [](const json&) {
      return json{{"id", nullptr}, {"error", "boom"}}.dump();
    });
    RemoteScorer remote(server.endpoint(), 4);
    try {
      remote.NextTokenLogprobs(ScorerContext::Empty(), {});
      FAIL("expected ScorerUnavailable");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kScorerUnavailable);
      CHECK(std::string(e.what()).find("boom") != std::string::npos);
    }
  }
  {
    FakeServer server(kProtocolVersion, [](const json&) { return std::string(); });
    RemoteScorer remote(server.endpoint(), 4);
    CHECK_THROWS_AS(remote.NextTokenLogprobs(ScorerContext::Empty(), {}), Error);
    // The connection stays closed afterwards.
    CHECK_THROWS_AS(remote.NextTokenLogprobs(ScorerContext::Empty(), {}), Error);
  }
  {
    FakeServer server(kProtocolVersion, [](const json& request) {
      return json{{"id", request.at("id")}, {"dists", json::array()}}.dump();
    });
    RemoteScorer remote(server.endpoint(), 4);
    CHECK_THROWS_AS(remote.NextTokenLogprobs(ScorerContext::Empty(), {}), Error);
  }
}

TEST_CASE("unreachable endpoints raise ScorerUnavailable") {
  std::uint16_t port = 0;
  {
    // Bind and release a port so nothing listens on it.
    TcpListener probe = ListenTcp(0);
    port = probe.port;
  }
  try {
    ConnectRemoteScorer("127.0.0.1:" + std::to_string(port), 4);
    FAIL("expected ScorerUnavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kScorerUnavailable);
  }
  CHECK_THROWS_AS(ConnectTcp("no-port-here"), Error);
}

}  // namespace
}  // namespace typecal
