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

#ifndef TYPECAL_REMOTE_SCORER_H_
#define TYPECAL_REMOTE_SCORER_H_

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "typecal/scorer.h"

namespace typecal {

// Newline-delimited byte stream over a TCP socket. Owns the descriptor.
class LineSocket {
 public:
  LineSocket() = default;
  explicit LineSocket(int fd) : fd_(fd) {}
  ~LineSocket();
  LineSocket(LineSocket&& other) noexcept;
  LineSocket& operator=(LineSocket&& other) noexcept;
  LineSocket(const LineSocket&) = delete;
  LineSocket& operator=(const LineSocket&) = delete;

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }

  void SetTimeout(std::chrono::milliseconds timeout);
  // Appends '\n'. Throws kScorerUnavailable on I/O failure.
  void SendLine(const std::string& line);
  // Without the trailing newline; nullopt on orderly end of stream.
  std::optional<std::string> ReadLine();
  void Close();

 private:
  int fd_ = -1;
  std::string buffer_;
};

// "host:port" -> connected socket.
LineSocket ConnectTcp(const std::string& endpoint);

// Listening socket on 127.0.0.1; port 0 picks a free port.
struct TcpListener {
  LineSocket socket;
  std::uint16_t port = 0;

  LineSocket Accept() const;
};
TcpListener ListenTcp(std::uint16_t port);

inline constexpr int kProtocolVersion = 1;

// Client side of the scorer wire protocol:
//   handshake  {"hello": 1}  <->  {"hello": 1}
//   request    {"id": n, "ctx": <text | null>, "prefixes": [[ids], ...]}
//   response   {"id": n, "dists": [{"<id>" | "EOS": logprob, ...}, ...]}
// A null ctx is the empty context. One request is in flight at a time; the
// instance serializes concurrent callers.
class RemoteScorer : public Scorer {
 public:
  RemoteScorer(const std::string& endpoint, std::int32_t token_alphabet_size,
               std::chrono::milliseconds timeout = std::chrono::seconds(120));

  std::int32_t token_alphabet_size() const override { return alphabet_size_; }
  TokenDistribution NextTokenLogprobs(const ScorerContext& context,
                                      std::span<const TokenId> prefix) override;
  std::vector<TokenDistribution> NextTokenLogprobsBatch(
      const ScorerContext& context,
      const std::vector<std::vector<TokenId>>& prefixes) override;

 private:
  std::int32_t alphabet_size_;
  std::string endpoint_;
  std::mutex mu_;
  LineSocket socket_;
  std::int64_t next_id_ = 0;
};

std::unique_ptr<Scorer> ConnectRemoteScorer(const std::string& endpoint,
                                            std::int32_t token_alphabet_size);

}  // namespace typecal

#endif  // TYPECAL_REMOTE_SCORER_H_
