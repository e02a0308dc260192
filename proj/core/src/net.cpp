#include "aprl/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "aprl/errors.hpp"

namespace aprl {

namespace {

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (host.empty() || host == "0.0.0.0") {
    addr.sin_addr.s_addr = INADDR_ANY;
  } else if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw IoError("invalid IPv4 address: " + host);
  }
  return addr;
}

}  // namespace

TcpStream::TcpStream(int fd) : fd_(fd) {
  if (fd_ >= 0) {
    const int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
}

TcpStream::TcpStream(TcpStream&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

TcpStream& TcpStream::operator=(TcpStream&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

TcpStream::~TcpStream() { close(); }

void TcpStream::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

TcpStream TcpStream::connect(const std::string& host, std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw IoError("socket() failed");
  sockaddr_in addr = make_addr(host.empty() ? "127.0.0.1" : host, port);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    const int err = errno;
    ::close(fd);
    throw IoError("connect to " + host + ":" + std::to_string(port) + " failed: " +
                  std::strerror(err));
  }
  return TcpStream(fd);
}

bool TcpStream::send_all(const void* data, std::size_t len) {
  const char* p = static_cast<const char*>(data);
  while (len > 0) {
    const ssize_t n = ::send(fd_, p, len, MSG_NOSIGNAL);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      return false;
    }
    p += n;
    len -= static_cast<std::size_t>(n);
  }
  return true;
}

bool TcpStream::recv_all(void* data, std::size_t len) {
  char* p = static_cast<char*>(data);
  while (len > 0) {
    const ssize_t n = ::recv(fd_, p, len, 0);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      return false;
    }
    p += n;
    len -= static_cast<std::size_t>(n);
  }
  return true;
}

TcpListener::TcpListener(TcpListener&& other) noexcept
    : fd_(other.fd_), port_(other.port_) {
  other.fd_ = -1;
}

TcpListener& TcpListener::operator=(TcpListener&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    port_ = other.port_;
    other.fd_ = -1;
  }
  return *this;
}

TcpListener::~TcpListener() { close(); }

void TcpListener::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

TcpListener TcpListener::bind(const std::string& address, std::uint16_t port) {
  TcpListener listener;
  listener.fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener.fd_ < 0) throw IoError("socket() failed");
  const int one = 1;
  ::setsockopt(listener.fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = make_addr(address, port);
  if (::bind(listener.fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
    throw IoError("bind " + address + ":" + std::to_string(port) + " failed: " +
                  std::strerror(errno));
  if (::listen(listener.fd_, 64) != 0) throw IoError("listen failed");
  socklen_t len = sizeof(addr);
  ::getsockname(listener.fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  listener.port_ = ntohs(addr.sin_port);
  return listener;
}

std::optional<TcpStream> TcpListener::accept(int timeout_ms) {
  pollfd pfd{fd_, POLLIN, 0};
  const int rc = ::poll(&pfd, 1, timeout_ms);
  if (rc <= 0) return std::nullopt;
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) return std::nullopt;
  return TcpStream(fd);
}

bool write_message(TcpStream& stream, const Message& message) {
  const std::string frame = encode_frame(message);
  return stream.send_all(frame.data(), frame.size());
}

std::optional<Message> read_message(TcpStream& stream, DecodeError& error) {
  error = DecodeError::None;
  std::string buffer(kFrameHeaderSize, '\0');
  if (!stream.recv_all(buffer.data(), buffer.size())) return std::nullopt;

  FrameInfo info;
  const DecodeResult header = validate_header(buffer, info);
  if (header.error != DecodeError::None) {
    error = header.error;
    return std::nullopt;
  }
  buffer.resize(info.frame_size);
  if (!stream.recv_all(buffer.data() + kFrameHeaderSize,
                       info.frame_size - kFrameHeaderSize))
    return std::nullopt;

  DecodeResult result = decode_frame(buffer);
  if (!result.ok()) {
    error = result.error;
    return std::nullopt;
  }
  return std::move(result.message);
}

}  // namespace aprl
