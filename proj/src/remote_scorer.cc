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

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <limits>

#include "json.hpp"
#include "typecal/error.h"

namespace typecal {
namespace {

[[noreturn]] void Unavailable(const std::string& what) {
  throw Error(ErrorCode::kScorerUnavailable, what);
}

std::string Errno() { return std::strerror(errno); }

}  // namespace

LineSocket::~LineSocket() { Close(); }

LineSocket::LineSocket(LineSocket&& other) noexcept
    : fd_(other.fd_), buffer_(std::move(other.buffer_)) {
  other.fd_ = -1;
}

LineSocket& LineSocket::operator=(LineSocket&& other) noexcept {
  if (this != &other) {
    Close();
    fd_ = other.fd_;
    buffer_ = std::move(other.buffer_);
    other.fd_ = -1;
  }
  return *this;
}

void LineSocket::Close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  buffer_.clear();
}

void LineSocket::SetTimeout(std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

void LineSocket::SendLine(const std::string& line) {
  const std::string data = line + "\n";
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n =
        ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      Unavailable("send failed: " + Errno());
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> LineSocket::ReadLine() {
  for (;;) {
    const auto newline = buffer_.find('\n');
    if (newline != std::string::npos) {
      std::string line = buffer_.substr(0, newline);
      buffer_.erase(0, newline + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    char chunk[4096];
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      Unavailable("receive failed: " + Errno());
    }
    if (n == 0) {
      if (buffer_.empty()) return std::nullopt;
      std::string line = std::move(buffer_);
      buffer_.clear();
      return line;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

LineSocket ConnectTcp(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == endpoint.size()) {
    Unavailable("endpoint must be host:port, got '" + endpoint + "'");
  }
  const std::string host = endpoint.substr(0, colon);
  const std::string port = endpoint.substr(colon + 1);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &result);
      rc != 0) {
    Unavailable("cannot resolve " + endpoint + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no addresses";
  for (addrinfo* ai = result; ai != nullptr; ai = ai->ai_next) {
    LineSocket sock(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!sock.valid()) continue;
    if (::connect(sock.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
      ::freeaddrinfo(result);
      return sock;
    }
    last_error = Errno();
  }
  ::freeaddrinfo(result);
  Unavailable("cannot connect to " + endpoint + ": " + last_error);
}

TcpListener ListenTcp(std::uint16_t port) {
  TcpListener listener;
  listener.socket = LineSocket(::socket(AF_INET, SOCK_STREAM, 0));
  if (!listener.socket.valid()) Unavailable("socket: " + Errno());
  const int one = 1;
  ::setsockopt(listener.socket.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listener.socket.fd(), reinterpret_cast<sockaddr*>(&addr),
             sizeof(addr)) != 0 ||
      ::listen(listener.socket.fd(), 8) != 0) {
    Unavailable("cannot listen: " + Errno());
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listener.socket.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  listener.port = ntohs(addr.sin_port);
  return listener;
}

LineSocket TcpListener::Accept() const {
  const int fd = ::accept(socket.fd(), nullptr, nullptr);
  if (fd < 0) Unavailable("accept: " + Errno());
  return LineSocket(fd);
}

RemoteScorer::RemoteScorer(const std::string& endpoint,
                           std::int32_t token_alphabet_size,
                           std::chrono::milliseconds timeout)
    : alphabet_size_(token_alphabet_size),
      endpoint_(endpoint),
      socket_(ConnectTcp(endpoint)) {
  socket_.SetTimeout(timeout);
  socket_.SendLine(nlohmann::json{{"hello", kProtocolVersion}}.dump());
  const auto reply = socket_.ReadLine();
  if (!reply) Unavailable("server closed the connection during handshake");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(*reply);
  } catch (const nlohmann::json::exception&) {
    Unavailable("malformed handshake reply: " + *reply);
  }
  if (!j.is_object() || !j.contains("hello")) {
    Unavailable("malformed handshake reply: " + *reply);
  }
  if (j["hello"] != kProtocolVersion) {
    Unavailable("protocol version mismatch: client " +
                std::to_string(kProtocolVersion) + ", server " +
                j["hello"].dump());
  }
}

TokenDistribution RemoteScorer::NextTokenLogprobs(
    const ScorerContext& context, std::span<const TokenId> prefix) {
  return NextTokenLogprobsBatch(
      context, {std::vector<TokenId>(prefix.begin(), prefix.end())})[0];
}

std::vector<TokenDistribution> RemoteScorer::NextTokenLogprobsBatch(
    const ScorerContext& context,
    const std::vector<std::vector<TokenId>>& prefixes) {
  std::lock_guard<std::mutex> lock(mu_);
  if (!socket_.valid()) Unavailable("connection to " + endpoint_ + " closed");
  const std::int64_t id = next_id_++;
  nlohmann::json request;
  request["id"] = id;
  request["ctx"] = context.is_empty() ? nlohmann::json(nullptr)
                                      : nlohmann::json(context.text());
  request["prefixes"] = prefixes;
  socket_.SendLine(request.dump());

  const auto reply = socket_.ReadLine();
  if (!reply) {
    socket_.Close();
    Unavailable("server closed the connection");
  }
  std::vector<TokenDistribution> out;
  try {
    const auto j = nlohmann::json::parse(*reply);
    if (j.contains("error")) Unavailable("server error: " + j["error"].dump());
    if (j.at("id") != id) Unavailable("response id mismatch: " + j.at("id").dump());
    const auto& dists = j.at("dists");
    if (!dists.is_array() || dists.size() != prefixes.size()) {
      Unavailable("expected " + std::to_string(prefixes.size()) + " distributions");
    }
    for (const auto& d : dists) {
      Eigen::VectorXd lp = Eigen::VectorXd::Constant(
          alphabet_size_ + 1, -std::numeric_limits<double>::infinity());
      for (const auto& [key, value] : d.items()) {
        TokenId token = alphabet_size_;
        if (key != "EOS") {
          const auto [ptr, ec] =
              std::from_chars(key.data(), key.data() + key.size(), token);
          if (ec != std::errc() || ptr != key.data() + key.size() || token < 0 ||
              token >= alphabet_size_) {
            Unavailable("bad token key in response: " + key);
          }
        }
        lp[token] = value.get<double>();
      }
      out.push_back({std::move(lp)});
    }
  } catch (const nlohmann::json::exception& e) {
    Unavailable(std::string("malformed response: ") + e.what());
  }
  return out;
}

std::unique_ptr<Scorer> ConnectRemoteScorer(const std::string& endpoint,
                                            std::int32_t token_alphabet_size) {
  return std::make_unique<RemoteScorer>(endpoint, token_alphabet_size);
}

}  // namespace typecal
