// SPDX-License-Identifier: Apache-2.0
#include "vempc/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "vempc/common.hpp"

namespace vempc {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw ConfigError("transport: " + what + ": " + std::strerror(errno));
}

void write_all(int fd, const uint8_t* data, size_t len) {
  while (len > 0) {
    const ssize_t n = ::send(fd, data, len, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("send failed");
    }
    data += n;
    len -= size_t(n);
  }
}

void read_all(int fd, uint8_t* data, size_t len) {
  while (len > 0) {
    const ssize_t n = ::recv(fd, data, len, 0);
    if (n == 0) throw ConfigError("transport: connection closed");
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("recv failed");
    }
    data += n;
    len -= size_t(n);
  }
}

}  // namespace

Socket::~Socket() { close(); }

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::send_frame(FrameKind kind, const std::vector<uint8_t>& payload) const {
  if (fd_ < 0) throw ConfigError("transport: socket not open");
  uint8_t head[5];
  const uint32_t len = uint32_t(payload.size());
  for (int i = 0; i < 4; ++i) head[i] = uint8_t(len >> (8 * i));
  head[4] = uint8_t(kind);
  write_all(fd_, head, sizeof(head));
  if (!payload.empty()) write_all(fd_, payload.data(), payload.size());
}

std::pair<FrameKind, std::vector<uint8_t>> Socket::recv_frame() const {
  if (fd_ < 0) throw ConfigError("transport: socket not open");
  uint8_t head[5];
  read_all(fd_, head, sizeof(head));
  uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= uint32_t(head[i]) << (8 * i);
  std::vector<uint8_t> payload(len);
  if (len > 0) read_all(fd_, payload.data(), len);
  return {FrameKind(head[4]), std::move(payload)};
}

Listener::Listener(uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) fail("socket failed");
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) fail("bind failed");
  if (::listen(fd_, 4) < 0) fail("listen failed");

  socklen_t len = sizeof(addr);
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) < 0)
    fail("getsockname failed");
  port_ = ntohs(addr.sin_port);
}

Listener::~Listener() {
  if (fd_ >= 0) ::close(fd_);
}

Socket Listener::accept_one() const {
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) fail("accept failed");
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return Socket(fd);
}

Socket tcp_connect(const std::string& host, uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) fail("socket failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw ConfigError("transport: host must be an IPv4 address");
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    const int saved = errno;
    ::close(fd);
    errno = saved;
    fail("connect failed");
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return Socket(fd);
}

}  // namespace vempc
