#include "auv/transport.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <thread>
#include <unistd.h>

namespace auv {

namespace {

struct Shared {
  std::string to_a;
  std::string to_b;
  bool closed = false;
};

class InProcessEnd : public ByteLink {
 public:
  InProcessEnd(std::shared_ptr<Shared> s, bool is_a) : s_(std::move(s)), a_(is_a) {}

  void send(std::string_view bytes) override {
    if (s_->closed) throw TransportError("link closed");
    (a_ ? s_->to_b : s_->to_a).append(bytes);
  }
  std::string receive(int) override {
    std::string out;
    out.swap(a_ ? s_->to_a : s_->to_b);
    return out;
  }
  void close() override { s_->closed = true; }
  bool closed() const override { return s_->closed; }

 private:
  std::shared_ptr<Shared> s_;
  bool a_;
};

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

sockaddr_in make_address(const std::string& host, int port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  const std::string h = host == "localhost" ? "127.0.0.1" : host;
  if (inet_pton(AF_INET, h.c_str(), &addr.sin_addr) != 1) throw TransportError("bad IPv4 address: " + host);
  return addr;
}

class TcpLink : public ByteLink {
 public:
  explicit TcpLink(int fd) : fd_(fd) {
    const int one = 1;
    setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~TcpLink() override { close(); }

  void send(std::string_view bytes) override {
    if (fd_ < 0) throw TransportError("link closed");
    while (!bytes.empty()) {
      const ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(errno_text("send"));
      }
      bytes.remove_prefix(static_cast<std::size_t>(n));
    }
  }

  std::string receive(int timeout_ms) override {
    std::string out;
    if (fd_ < 0) return out;
    pollfd p{fd_, POLLIN, 0};
    int wait = timeout_ms;
    char buf[8192];
    while (true) {
      const int r = ::poll(&p, 1, wait);
      if (r < 0 && errno == EINTR) continue;
      if (r <= 0) break;
      const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        peer_closed_ = true;
        break;
      }
      out.append(buf, static_cast<std::size_t>(n));
      wait = 0;  // drain what is already queued, then return
    }
    return out;
  }

  void close() override {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }
  bool closed() const override { return fd_ < 0 || peer_closed_; }

 private:
  int fd_;
  bool peer_closed_ = false;
};

}  // namespace

std::pair<std::unique_ptr<ByteLink>, std::unique_ptr<ByteLink>> make_in_process_pair() {
  auto s = std::make_shared<Shared>();
  return {std::make_unique<InProcessEnd>(s, true), std::make_unique<InProcessEnd>(s, false)};
}

TcpListener::TcpListener(const std::string& host, int port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError(errno_text("socket"));
  const int one = 1;
  setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr = make_address(host, port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(fd_, 1) < 0) {
    const std::string msg = errno_text("bind/listen");
    ::close(fd_);
    throw TransportError(msg);
  }
  socklen_t len = sizeof addr;
  getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<ByteLink> TcpListener::accept(int timeout_ms) {
  pollfd p{fd_, POLLIN, 0};
  if (::poll(&p, 1, timeout_ms) <= 0) throw TransportError("no connection within timeout");
  const int c = ::accept(fd_, nullptr, nullptr);
  if (c < 0) throw TransportError(errno_text("accept"));
  return std::make_unique<TcpLink>(c);
}

std::unique_ptr<ByteLink> tcp_connect(const std::string& host, int port, int timeout_ms) {
  const sockaddr_in addr = make_address(host, port);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  while (true) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw TransportError(errno_text("socket"));
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) == 0) {
      return std::make_unique<TcpLink>(fd);
    }
    ::close(fd);
    if (std::chrono::steady_clock::now() > deadline) throw TransportError(errno_text("connect"));
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
}

}  // namespace auv
