#include "crowdcount/subprocess_backend.hpp"

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

#include "crowdcount/error.hpp"

namespace crowdcount {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

std::string describe_status(int status) {
  if (WIFEXITED(status)) return "exited with status " + std::to_string(WEXITSTATUS(status));
  if (WIFSIGNALED(status)) return "killed by signal " + std::to_string(WTERMSIG(status));
  return "stopped";
}

std::filesystem::path make_scratch_dir() {
  std::string pattern = (std::filesystem::temp_directory_path() / "crowdcount-XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) throw BackendError(errno_text("mkdtemp"));
  return pattern;
}

void remove_scratch_dir(const std::filesystem::path& dir) noexcept {
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
}

}  // namespace

std::chrono::milliseconds backend_timeout_from_env() {
  const char* raw = std::getenv(kBackendTimeoutEnv);
  if (raw == nullptr || *raw == '\0') return kDefaultBackendTimeout;
  char* end = nullptr;
  const double seconds = std::strtod(raw, &end);
  if (end == raw || *end != '\0' || !(seconds > 0.0) || !std::isfinite(seconds)) {
    throw InvalidInput(std::string(kBackendTimeoutEnv) + " must be a positive number of seconds, got '" +
                       raw + "'");
  }
  return std::chrono::milliseconds(static_cast<long long>(std::llround(seconds * 1000.0)));
}

SubprocessChannel::SubprocessChannel(std::string command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {
  // A backend that dies mid-request must surface as an error, not kill us.
  std::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw BackendError(errno_text("pipe"));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw BackendError(errno_text("pipe"));
  }

  pid_ = ::fork();
  if (pid_ < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw BackendError(errno_text("fork"));
  }
  if (pid_ == 0) {
    // own process group, so a kill also reaches anything the shell spawned
    ::setpgid(0, 0);
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid_, pid_);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

SubprocessChannel::~SubprocessChannel() { shutdown(); }

void SubprocessChannel::shutdown() noexcept {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ <= 0) return;
  int status = 0;
  for (int i = 0; i < 100; ++i) {
    if (::waitpid(pid_, &status, WNOHANG) == pid_) {
      pid_ = -1;
      return;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ::kill(-pid_, SIGKILL);
  ::waitpid(pid_, &status, 0);
  pid_ = -1;
}

std::string SubprocessChannel::read_line() {
  const auto deadline = Clock::now() + timeout_;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) {
      const auto ms = timeout_.count();
      shutdown();
      throw BackendError("backend '" + command_ + "' timed out after " + std::to_string(ms) + " ms");
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw BackendError(errno_text("poll"));
    }
    if (ready == 0) continue;

    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw BackendError(errno_text("read"));
    }
    if (n == 0) {
      int status = 0;
      ::close(to_child_);
      to_child_ = -1;
      const std::string how =
          ::waitpid(pid_, &status, 0) == pid_ ? describe_status(status) : std::string("closed its output");
      pid_ = -1;
      throw BackendError("backend '" + command_ + "' " + how);
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

json SubprocessChannel::call(json request) {
  if (to_child_ < 0 || from_child_ < 0) throw BackendError("backend '" + command_ + "' is not running");

  const std::int64_t id = next_id_++;
  request["id"] = id;
  const std::string line = request.dump() + "\n";
  for (std::size_t off = 0; off < line.size();) {
    const ssize_t n = ::write(to_child_, line.data() + off, line.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw BackendError("backend '" + command_ + "' " + errno_text("write"));
    }
    off += static_cast<std::size_t>(n);
  }

  const std::string raw = read_line();
  json response;
  try {
    response = json::parse(raw);
  } catch (const json::parse_error&) {
    throw ProtocolError("backend '" + command_ + "' sent a non-JSON line", raw);
  }
  if (!response.is_object()) throw ProtocolError("backend response is not an object", raw);
  const auto rid = response.find("id");
  if (rid == response.end() || !rid->is_number_integer()) throw ProtocolError("backend response lacks an id", raw);
  if (rid->get<std::int64_t>() != id) {
    throw ProtocolError("backend answered id " + std::to_string(rid->get<std::int64_t>()) + " to request " +
                            std::to_string(id),
                        raw);
  }
  if (const auto err = response.find("error"); err != response.end()) {
    throw BackendError("backend '" + command_ + "' error: " +
                       (err->is_string() ? err->get<std::string>() : err->dump()));
  }
  return response;
}

std::vector<ScoredBox> parse_boxes(const json& boxes) {
  if (!boxes.is_array()) throw ProtocolError("'boxes' is not an array", boxes.dump());
  std::vector<ScoredBox> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) {
    auto field = [&](const char* key) {
      const auto it = b.find(key);
      if (it == b.end() || !it->is_number()) throw ProtocolError(std::string("box lacks numeric '") + key + "'", b.dump());
      return it->get<double>();
    };
    if (!b.is_object()) throw ProtocolError("box is not an object", b.dump());
    out.push_back({{field("x"), field("y"), field("w"), field("h")}, field("score")});
  }
  return out;
}

SubprocessDetector::SubprocessDetector(std::string command, std::chrono::milliseconds timeout)
    : channel_(std::move(command), timeout), scratch_dir_(make_scratch_dir()) {}

SubprocessDetector::~SubprocessDetector() { remove_scratch_dir(scratch_dir_); }

BackendInfo SubprocessDetector::info() const { return {channel_.command(), "subprocess-jsonl/1"}; }

std::vector<ScoredBox> SubprocessDetector::detect(const ImageRaster& image, double scale) {
  const auto path = scratch_dir_ / "level.ppm";
  write_ppm(path, image);
  const json response =
      channel_.call({{"op", "detect"}, {"image_path", path.string()}, {"scale", scale}});
  const auto boxes = response.find("boxes");
  if (boxes == response.end()) throw ProtocolError("detect response lacks 'boxes'", response.dump());
  return parse_boxes(*boxes);
}

SubprocessEmbedder::SubprocessEmbedder(std::string command, std::chrono::milliseconds timeout)
    : channel_(std::move(command), timeout), scratch_dir_(make_scratch_dir()) {}

SubprocessEmbedder::~SubprocessEmbedder() { remove_scratch_dir(scratch_dir_); }

Embedding SubprocessEmbedder::embed(const ImageRaster& crop) {
  const auto path = scratch_dir_ / "crop.ppm";
  write_ppm(path, crop);
  const json box{{"x", 0}, {"y", 0}, {"w", crop.width()}, {"h", crop.height()}};
  const json response = channel_.call({{"op", "embed"}, {"image_path", path.string()}, {"box", box}});
  const auto vec = response.find("vec");
  if (vec == response.end() || !vec->is_array() || vec->size() != kEmbeddingDim) {
    throw ProtocolError("embed response must carry " + std::to_string(kEmbeddingDim) + " values",
                        response.dump());
  }
  Embedding e;
  for (std::size_t i = 0; i < kEmbeddingDim; ++i) {
    if (!(*vec)[i].is_number() || !std::isfinite((*vec)[i].get<double>())) {
      throw ProtocolError("embed response has a non-finite value", response.dump());
    }
    e[i] = (*vec)[i].get<double>();
  }
  return e;
}

}  // namespace crowdcount
