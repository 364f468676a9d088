#pragma once

// Tick protocol for external controllers: newline-delimited JSON frames over
// a byte stream (child stdio or a connected socket).
//
//   harness -> peer   {"anticarla_proto":1,"sensors":[{"kind":..,"rate_hz":..},..]}
//   peer -> harness   {"anticarla_proto":1}
//   harness -> peer   {"tick":k,"observation":{...}}
//   peer -> harness   {"controls":{"throttle":f,"brake":f,"steer":f}}
//   harness -> peer   {"end":true}

#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "advtest/error.hpp"
#include "advtest/harness/vehicle.hpp"
#include "advtest/json_io.hpp"
#include "advtest/sdl/agent_spec.hpp"

extern char** environ;

namespace advtest::harness {

inline constexpr std::int64_t kProtocolVersion = 1;

/// Line-framed duplex channel over two file descriptors it owns.
class LineChannel {
 public:
  LineChannel() = default;
  LineChannel(int read_fd, int write_fd) : rfd_(read_fd), wfd_(write_fd) {
    // A peer that exits early must surface as an error, not SIGPIPE.
    static const bool ignored = [] {
      ::signal(SIGPIPE, SIG_IGN);
      return true;
    }();
    (void)ignored;
  }
  LineChannel(const LineChannel&) = delete;
  LineChannel& operator=(const LineChannel&) = delete;
  LineChannel(LineChannel&& o) noexcept { *this = std::move(o); }
  LineChannel& operator=(LineChannel&& o) noexcept {
    if (this != &o) {
      close();
      rfd_ = std::exchange(o.rfd_, -1);
      wfd_ = std::exchange(o.wfd_, -1);
      buf_ = std::move(o.buf_);
    }
    return *this;
  }
  ~LineChannel() { close(); }

  void close() {
    if (wfd_ >= 0 && wfd_ != rfd_) ::close(wfd_);
    if (rfd_ >= 0) ::close(rfd_);
    rfd_ = wfd_ = -1;
  }
  void close_write() {
    if (wfd_ >= 0 && wfd_ != rfd_) ::close(wfd_);
    if (wfd_ == rfd_) ::shutdown(wfd_, SHUT_WR);
    wfd_ = -1;
  }

  void write_line(const std::string& line) {
    std::string data = line;
    data += '\n';
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::write(wfd_, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(std::string("write to controller failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  /// Next line without its terminator; nullopt on end of stream.
  std::optional<std::string> read_line(double timeout_s) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    for (;;) {
      if (auto nl = buf_.find('\n'); nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw ProtocolError("timed out waiting for controller frame");
      pollfd p{rfd_, POLLIN, 0};
      const int r = ::poll(&p, 1, static_cast<int>(left.count()));
      if (r < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(std::string("poll failed: ") + std::strerror(errno));
      }
      if (r == 0) continue;
      char chunk[4096];
      const ssize_t n = ::read(rfd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw ProtocolError(std::string("read from controller failed: ") + std::strerror(errno));
      }
      if (n == 0) return std::nullopt;
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int rfd_ = -1;
  int wfd_ = -1;
  std::string buf_;
};

/// `/bin/sh -c command` with stdin/stdout piped to a LineChannel.
class ChildProcess {
 public:
  explicit ChildProcess(const std::string& command) {
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0) throw ProtocolError("pipe failed");
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw ProtocolError("pipe failed");
    }
    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    posix_spawn_file_actions_adddup2(&fa, to_child[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&fa, from_child[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&fa, to_child[1]);
    posix_spawn_file_actions_addclose(&fa, from_child[0]);
    std::string sh = "/bin/sh", dash_c = "-c", cmd = command;
    char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
    const int rc = posix_spawn(&pid_, "/bin/sh", &fa, nullptr, argv, environ);
    posix_spawn_file_actions_destroy(&fa);
    ::close(to_child[0]);
    ::close(from_child[1]);
    if (rc != 0) {
      ::close(to_child[1]);
      ::close(from_child[0]);
      throw ProtocolError("cannot start controller '" + command + "': " + std::strerror(rc));
    }
    channel_ = LineChannel(from_child[0], to_child[1]);
  }
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  ~ChildProcess() {
    channel_.close_write();
    for (int i = 0; i < 50; ++i) {
      int status = 0;
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        channel_.close();
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(4));
    }
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    channel_.close();
  }

  LineChannel& channel() { return channel_; }

 private:
  pid_t pid_ = -1;
  LineChannel channel_;
};

inline nlohmann::json parse_frame(const std::string& line, const std::string& where) {
  try {
    auto j = nlohmann::json::parse(line);
    if (!j.is_object()) throw ProtocolError("malformed frame " + where + ": not a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError("malformed frame " + where + ": " + e.what());
  }
}

inline ojson handshake_frame(const std::vector<sdl::SensorSpec>& sensors) {
  ojson s = ojson::array();
  for (const auto& x : sensors) s.push_back(ojson{{"kind", x.kind}, {"rate_hz", x.rate_hz}});
  return ojson{{"anticarla_proto", kProtocolVersion}, {"sensors", s}};
}

/// Validates a handshake reply; throws naming both versions on mismatch.
inline void check_handshake_reply(const nlohmann::json& j) {
  const auto it = j.find("anticarla_proto");
  if (it == j.end() || !it->is_number_integer())
    throw ProtocolError("malformed handshake reply: missing integer anticarla_proto");
  const auto v = it->get<std::int64_t>();
  if (v != kProtocolVersion)
    throw ProtocolError("protocol version mismatch: harness speaks " + std::to_string(kProtocolVersion) +
                        ", controller speaks " + std::to_string(v));
}

inline ojson tick_frame(std::int64_t tick, const ojson& observation) {
  return ojson{{"tick", tick}, {"observation", observation}};
}

inline Controls parse_controls(const nlohmann::json& j, std::int64_t tick) {
  const std::string where = "at tick " + std::to_string(tick);
  const auto c = j.find("controls");
  if (c == j.end() || !c->is_object()) throw ProtocolError("malformed frame " + where + ": missing controls object");
  auto field = [&](const char* k) {
    const auto f = c->find(k);
    if (f == c->end() || !f->is_number()) throw ProtocolError("malformed frame " + where + ": controls." + k + " missing");
    const double v = f->get<double>();
    if (!std::isfinite(v)) throw ProtocolError("malformed frame " + where + ": controls." + k + " not finite");
    return v;
  };
  return {field("throttle"), field("brake"), field("steer")};
}

/// One protocol session with an external controller process.
class ExternalController {
 public:
  ExternalController(const std::string& command, const std::vector<sdl::SensorSpec>& sensors, double timeout_s = 1.0)
      : child_(command), timeout_s_(timeout_s) {
    auto& ch = child_.channel();
    ch.write_line(dump_line(handshake_frame(sensors)));
    const auto reply = ch.read_line(timeout_s_);
    if (!reply) throw ProtocolError("controller closed the connection during handshake");
    check_handshake_reply(parse_frame(*reply, "in handshake"));
  }

  Controls exchange(std::int64_t tick, const ojson& observation) {
    auto& ch = child_.channel();
    ch.write_line(dump_line(tick_frame(tick, observation)));
    const auto line = ch.read_line(timeout_s_);
    if (!line) throw ProtocolError("controller closed the connection at tick " + std::to_string(tick));
    return parse_controls(parse_frame(*line, "at tick " + std::to_string(tick)), tick);
  }

  void finish() {
    try {
      child_.channel().write_line(R"({"end":true})");
    } catch (const ProtocolError&) {
    }
  }

 private:
  ChildProcess child_;
  double timeout_s_;
};

}  // namespace advtest::harness
