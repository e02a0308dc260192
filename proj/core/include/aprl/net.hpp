#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "aprl/wire.hpp"

namespace aprl {

// Thin RAII wrappers over POSIX stream sockets, just enough for the framed
// protocol.
class TcpStream {
 public:
  TcpStream() = default;
  explicit TcpStream(int fd);
  TcpStream(TcpStream&& other) noexcept;
  TcpStream& operator=(TcpStream&& other) noexcept;
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;
  ~TcpStream();

  // Throws IoError when the connection fails.
  static TcpStream connect(const std::string& host, std::uint16_t port);

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  void close();

  // false on EPIPE/reset (peer gone)
  bool send_all(const void* data, std::size_t len);
  // false on EOF or error before len bytes arrive
  bool recv_all(void* data, std::size_t len);

 private:
  int fd_ = -1;
};

class TcpListener {
 public:
  TcpListener() = default;
  TcpListener(TcpListener&& other) noexcept;
  TcpListener& operator=(TcpListener&& other) noexcept;
  TcpListener(const TcpListener&) = delete;
  ~TcpListener();

  static TcpListener bind(const std::string& address, std::uint16_t port);

  // Waits up to timeout_ms; empty when nothing arrived.
  std::optional<TcpStream> accept(int timeout_ms);

  std::uint16_t port() const { return port_; }
  int fd() const { return fd_; }
  void close();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

// Framed message IO. read_message blocks until a whole frame arrives;
// returns nullopt on EOF/connection loss and surfaces decode failures
// through `error`.
bool write_message(TcpStream& stream, const Message& message);
std::optional<Message> read_message(TcpStream& stream, DecodeError& error);

}  // namespace aprl
