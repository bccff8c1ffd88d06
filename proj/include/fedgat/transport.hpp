#pragma once

// Message framing and the two transports behind the round loop: in-process
// queues and TCP over loopback. Both move identical frames — 4-byte
// little-endian length (covering version+type+payload), 1-byte version,
// 1-byte type — so byte accounting matches across transports exactly.

#include <cerrno>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <deque>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

namespace fedgat {

enum class MsgType : std::uint8_t {
  kHello = 1,
  kGlobalModel = 2,
  kUpdate = 3,
  kRoundDone = 4,
  kShutdown = 5,
};

constexpr std::uint8_t kProtocolVersion = 1;

struct Message {
  MsgType type = MsgType::kHello;
  std::string payload;
};

inline std::string encode_frame(const Message& m) {
  const std::uint32_t len = static_cast<std::uint32_t>(2 + m.payload.size());
  std::string out;
  out.reserve(4 + len);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((len >> (8 * i)) & 0xff));
  out.push_back(static_cast<char>(kProtocolVersion));
  out.push_back(static_cast<char>(m.type));
  out += m.payload;
  return out;
}

inline std::size_t frame_size(const Message& m) { return 6 + m.payload.size(); }

// Parse one frame from buf starting at pos; advances pos past the frame.
inline Message decode_frame(const std::string& buf, std::size_t& pos) {
  if (pos + 4 > buf.size()) throw std::runtime_error("frame: truncated length");
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i)
    len |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
  pos += 4;
  if (len < 2 || pos + len > buf.size()) throw std::runtime_error("frame: truncated body");
  if (static_cast<std::uint8_t>(buf[pos]) != kProtocolVersion)
    throw std::runtime_error("frame: unsupported version");
  Message m;
  m.type = static_cast<MsgType>(static_cast<std::uint8_t>(buf[pos + 1]));
  m.payload.assign(buf, pos + 2, len - 2);
  pos += len;
  return m;
}

// Duplex message endpoint with exact on-wire byte counters.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(const Message& m) = 0;
  virtual Message recv() = 0;
  std::uint64_t bytes_sent() const { return bytes_sent_; }
  std::uint64_t bytes_received() const { return bytes_received_; }

 protected:
  std::uint64_t bytes_sent_ = 0;
  std::uint64_t bytes_received_ = 0;
};

// ---- in-process queue transport ----

namespace detail {

struct MsgQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::string> frames;  // encoded frames, so queue bytes == wire bytes

  void push(std::string frame) {
    {
      std::lock_guard<std::mutex> lock(mu);
      frames.push_back(std::move(frame));
    }
    cv.notify_one();
  }

  std::string pop() {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [this] { return !frames.empty(); });
    std::string f = std::move(frames.front());
    frames.pop_front();
    return f;
  }
};

}  // namespace detail

class InProcChannel : public Channel {
 public:
  InProcChannel(std::shared_ptr<detail::MsgQueue> out, std::shared_ptr<detail::MsgQueue> in)
      : out_(std::move(out)), in_(std::move(in)) {}

  void send(const Message& m) override {
    std::string frame = encode_frame(m);
    bytes_sent_ += frame.size();
    out_->push(std::move(frame));
  }

  Message recv() override {
    const std::string frame = in_->pop();
    bytes_received_ += frame.size();
    std::size_t pos = 0;
    return decode_frame(frame, pos);
  }

 private:
  std::shared_ptr<detail::MsgQueue> out_;
  std::shared_ptr<detail::MsgQueue> in_;
};

// Connected pair: first endpoint for the server, second for the client.
inline std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_inproc_pair() {
  auto down = std::make_shared<detail::MsgQueue>();  // server -> client
  auto up = std::make_shared<detail::MsgQueue>();    // client -> server
  return {std::make_unique<InProcChannel>(down, up), std::make_unique<InProcChannel>(up, down)};
}

// ---- TCP transport (loopback) ----

class TcpChannel : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {}
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;
  ~TcpChannel() override {
    if (fd_ >= 0) ::close(fd_);
  }

  void send(const Message& m) override {
    const std::string frame = encode_frame(m);
    std::size_t off = 0;
    while (off < frame.size()) {
      const ssize_t n = ::write(fd_, frame.data() + off, frame.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw std::runtime_error("tcp send: " + std::string(std::strerror(errno)));
      }
      off += static_cast<std::size_t>(n);
    }
    bytes_sent_ += frame.size();
  }

  Message recv() override {
    std::string header = read_exact(4);
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i)
      len |= static_cast<std::uint32_t>(static_cast<unsigned char>(header[i])) << (8 * i);
    if (len < 2) throw std::runtime_error("tcp recv: bad frame length");
    const std::string body = read_exact(len);
    bytes_received_ += 4 + len;
    std::string frame = header + body;
    std::size_t pos = 0;
    return decode_frame(frame, pos);
  }

 private:
  std::string read_exact(std::size_t n) {
    std::string buf(n, '\0');
    std::size_t off = 0;
    while (off < n) {
      const ssize_t r = ::read(fd_, buf.data() + off, n - off);
      if (r < 0) {
        if (errno == EINTR) continue;
        throw std::runtime_error("tcp recv: " + std::string(std::strerror(errno)));
      }
      if (r == 0) throw std::runtime_error("tcp recv: peer closed");
      off += static_cast<std::size_t>(r);
    }
    return buf;
  }

  int fd_ = -1;
};

// Loopback listener that hands out accepted server-side channels.
class TcpListener {
 public:
  TcpListener() {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw std::runtime_error("tcp listen: socket failed");
    const int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;  // ephemeral
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
      throw std::runtime_error("tcp listen: bind failed");
    if (::listen(fd_, 64) != 0) throw std::runtime_error("tcp listen: listen failed");
    socklen_t len = sizeof(addr);
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0)
      throw std::runtime_error("tcp listen: getsockname failed");
    port_ = ntohs(addr.sin_port);
  }
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;
  ~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
  }

  std::uint16_t port() const { return port_; }

  std::unique_ptr<Channel> accept() {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) throw std::runtime_error("tcp accept failed");
    return std::make_unique<TcpChannel>(fd);
  }

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

inline std::unique_ptr<Channel> tcp_connect(std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw std::runtime_error("tcp connect: socket failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    throw std::runtime_error("tcp connect: connect failed");
  }
  return std::make_unique<TcpChannel>(fd);
}

}  // namespace fedgat
