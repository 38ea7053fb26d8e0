// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace vempc {

// One frame per message: u32 payload length (little endian), u8 kind, payload.
enum class FrameKind : uint8_t {
  kSetup = 1,
  kRequest = 2,
  kResponse = 3,
  kBye = 4,
};

// Thin owning wrapper over a connected stream socket.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  bool open() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  void close();

  void send_frame(FrameKind kind, const std::vector<uint8_t>& payload) const;
  std::pair<FrameKind, std::vector<uint8_t>> recv_frame() const;

 private:
  int fd_ = -1;
};

// Listening socket bound to 127.0.0.1; port 0 picks an ephemeral port.
class Listener {
 public:
  explicit Listener(uint16_t port);
  ~Listener();
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;

  uint16_t port() const { return port_; }
  Socket accept_one() const;

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

Socket tcp_connect(const std::string& host, uint16_t port);

}  // namespace vempc
