#include "lowlat/external_estimator.hpp"

#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

extern char** environ;

namespace lowlat {

namespace {

static_assert(std::endian::native == std::endian::little,
              "external estimator protocol encoding assumes a little-endian host");

void append_block(std::vector<float>& out, std::span<const Complex> bins) {
  for (const auto& b : bins) {
    out.push_back(static_cast<float>(b.real()));
    out.push_back(static_cast<float>(b.imag()));
  }
}

}  // namespace

std::string external_handshake(std::size_t n_bins, std::size_t channels, int stage,
                               Eigen::Index ref_mic, int lookahead) {
  return "LOWLAT-EST 1 n_bins=" + std::to_string(n_bins) + " channels=" + std::to_string(channels) +
         " stage=" + std::to_string(stage) + " ref_mic=" + std::to_string(ref_mic) +
         " lookahead=" + std::to_string(lookahead) + "\n";
}

std::vector<float> encode_external_request(const EstimatorInput& input, int stage) {
  const auto n_bins = static_cast<std::size_t>(input.mixture.frequencies());
  const auto channels = static_cast<std::size_t>(input.mixture.channels());
  std::vector<float> out;
  out.reserve(2 * n_bins * (channels + (stage == 2 ? 2 : 0)));
  for (Eigen::Index p = 0; p < input.mixture.channels(); ++p) {
    append_block(out, input.mixture.channel(p).bins);
  }
  if (stage == 2) {
    const std::vector<Complex> zeros(n_bins, Complex(0.0, 0.0));
    append_block(out, input.stage1 ? std::span<const Complex>(input.stage1->bins) : zeros);
    append_block(out, input.beamformed ? std::span<const Complex>(input.beamformed->bins) : zeros);
  }
  return out;
}

SpectrumFrame decode_external_response(std::span<const float> payload, std::size_t n_bins,
                                       std::int64_t frame_index) {
  if (payload.size() != 2 * n_bins) {
    throw ProtocolError("external estimator returned " + std::to_string(payload.size()) +
                        " values for frame " + std::to_string(frame_index) + ", expected " +
                        std::to_string(2 * n_bins));
  }
  SpectrumFrame f;
  f.frame_index = frame_index;
  f.bins.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) f.bins[k] = Complex(payload[2 * k], payload[2 * k + 1]);
  return f;
}

ExternalEstimator::ExternalEstimator(const std::string& command, std::size_t n_bins,
                                     std::size_t channels, int stage, Eigen::Index ref_mic,
                                     int lookahead, int timeout_ms)
    : command_(command),
      n_bins_(n_bins),
      channels_(channels),
      stage_(stage),
      lookahead_(lookahead),
      timeout_ms_(timeout_ms) {
  int sv[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
    throw ProtocolError("socketpair failed: " + std::string(std::strerror(errno)));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, sv[1], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, sv[1], STDOUT_FILENO);

  // Own process group, so a kill also reaches whatever the shell started.
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);

  std::string sh = "/bin/sh";
  std::string dash_c = "-c";
  std::string cmd = command_;
  char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
  const int rc = ::posix_spawn(&pid_, "/bin/sh", &actions, &attr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  ::close(sv[1]);
  if (rc != 0) {
    ::close(sv[0]);
    throw ProtocolError("cannot start external estimator '" + command_ + "': " + std::strerror(rc));
  }
  fd_ = sv[0];

  try {
    const auto hello = external_handshake(n_bins_, channels_, stage_, ref_mic, lookahead_);
    send_all(hello.data(), hello.size());
    std::string reply;
    char c = 0;
    while (reply.size() < 64) {
      recv_all(&c, 1);
      if (c == '\n') break;
      reply.push_back(c);
    }
    if (reply != "READY") {
      throw ProtocolError("external estimator handshake failed: got '" + reply + "'");
    }
  } catch (...) {
    terminate();
    throw;
  }
}

ExternalEstimator::~ExternalEstimator() { terminate(); }

void ExternalEstimator::terminate() noexcept {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_WR);
    ::close(fd_);
    fd_ = -1;
  }
  if (pid_ > 0) {
    int status = 0;
    bool exited = false;
    for (int i = 0; i < 100 && !exited; ++i) {
      exited = ::waitpid(pid_, &status, WNOHANG) == pid_;
      if (!exited) std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    if (!exited) {
      ::kill(-pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
    pid_ = -1;
  }
}

void ExternalEstimator::send_all(const void* data, std::size_t size) {
  const auto* p = static_cast<const char*>(data);
  while (size > 0) {
    const ssize_t n = ::send(fd_, p, size, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError("external estimator write failed: " + std::string(std::strerror(errno)));
    }
    p += n;
    size -= static_cast<std::size_t>(n);
  }
}

void ExternalEstimator::recv_all(void* data, std::size_t size) {
  auto* p = static_cast<char*>(data);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms_);
  while (size > 0) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      throw ProtocolError("external estimator timed out after " + std::to_string(timeout_ms_) +
                          " ms");
    }
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError("poll failed: " + std::string(std::strerror(errno)));
    }
    if (ready == 0) continue;
    const ssize_t n = ::recv(fd_, p, size, 0);
    if (n == 0) throw ProtocolError("external estimator closed its output");
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError("external estimator read failed: " + std::string(std::strerror(errno)));
    }
    p += n;
    size -= static_cast<std::size_t>(n);
  }
}

SpectrumFrame ExternalEstimator::estimate(const EstimatorInput& input, int lookahead) {
  if (static_cast<std::size_t>(input.mixture.channels()) != channels_ ||
      static_cast<std::size_t>(input.mixture.frequencies()) != n_bins_) {
    throw ValidationError("external estimator input does not match its handshake");
  }
  if (lookahead != lookahead_) {
    throw ValidationError("external estimator was started with a different lookahead");
  }
  const auto request = encode_external_request(input, stage_);
  const auto count = static_cast<std::uint32_t>(request.size());
  send_all(&count, sizeof count);
  send_all(request.data(), request.size() * sizeof(float));

  std::uint32_t reply_count = 0;
  recv_all(&reply_count, sizeof reply_count);
  if (reply_count != 2 * n_bins_) {
    throw ProtocolError("external estimator announced " + std::to_string(reply_count) +
                        " values, expected " + std::to_string(2 * n_bins_));
  }
  std::vector<float> payload(reply_count);
  recv_all(payload.data(), payload.size() * sizeof(float));
  return decode_external_response(payload, n_bins_, input.mixture.frame_index + lookahead);
}

}  // namespace lowlat
