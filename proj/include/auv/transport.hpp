#pragma once

// Byte-stream links between the frontseat and the backseat.

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace auv {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One end of a bidirectional byte stream. Message boundaries are not
/// preserved; the reader reassembles lines.
class ByteLink {
 public:
  virtual ~ByteLink() = default;
  virtual void send(std::string_view bytes) = 0;
  /// Returns whatever has arrived, waiting at most timeout_ms for the first byte
  /// (0 = poll). An empty string means nothing arrived.
  virtual std::string receive(int timeout_ms = 0) = 0;
  virtual void close() = 0;
  virtual bool closed() const = 0;
};

/// Two connected in-memory ends. Not thread safe: the in-process runner
/// alternates the two sides on one thread.
std::pair<std::unique_ptr<ByteLink>, std::unique_ptr<ByteLink>> make_in_process_pair();

/// Listening socket on the loopback interface.
class TcpListener {
 public:
  /// port 0 picks a free port.
  TcpListener(const std::string& host, int port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  int port() const { return port_; }
  std::unique_ptr<ByteLink> accept(int timeout_ms);

 private:
  int fd_ = -1;
  int port_ = 0;
};

std::unique_ptr<ByteLink> tcp_connect(const std::string& host, int port, int timeout_ms);

}  // namespace auv
