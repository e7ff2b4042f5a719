#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <sys/types.h>

#include <json.hpp>

#include "crowdcount/matchkit.hpp"
#include "crowdcount/pyramid.hpp"

namespace crowdcount {

inline constexpr const char* kBackendTimeoutEnv = "CROWDCOUNT_BACKEND_TIMEOUT_S";
inline constexpr std::chrono::seconds kDefaultBackendTimeout{120};

// Reads CROWDCOUNT_BACKEND_TIMEOUT_S, falling back to 120 s.
std::chrono::milliseconds backend_timeout_from_env();

// A child process speaking line-delimited JSON over stdin/stdout. One request
// is in flight at a time; responses are correlated by their "id" field.
class SubprocessChannel {
public:
  // `command` runs under /bin/sh -c.
  explicit SubprocessChannel(std::string command,
                             std::chrono::milliseconds timeout = backend_timeout_from_env());
  ~SubprocessChannel();

  SubprocessChannel(const SubprocessChannel&) = delete;
  SubprocessChannel& operator=(const SubprocessChannel&) = delete;

  // Assigns the next id, writes one line, reads one line. Throws BackendError
  // on exit, timeout or an "error" response and ProtocolError on a malformed
  // or mismatched response line.
  nlohmann::json call(nlohmann::json request);

  const std::string& command() const noexcept { return command_; }

private:
  std::string read_line();
  void shutdown() noexcept;

  std::string command_;
  std::chrono::milliseconds timeout_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::int64_t next_id_ = 1;
};

// Parses the "boxes" array of a response.
std::vector<ScoredBox> parse_boxes(const nlohmann::json& boxes);

// Detector behind the subprocess protocol. Each pyramid level is written to a
// temporary PPM file whose path goes in the request.
class SubprocessDetector final : public DetectorBackend {
public:
  explicit SubprocessDetector(std::string command,
                              std::chrono::milliseconds timeout = backend_timeout_from_env());
  ~SubprocessDetector() override;

  BackendInfo info() const override;
  std::vector<ScoredBox> detect(const ImageRaster& image, double scale) override;

private:
  SubprocessChannel channel_;
  std::filesystem::path scratch_dir_;
};

// Embedder behind the subprocess protocol ("op": "embed").
class SubprocessEmbedder final : public EmbedderBackend {
public:
  explicit SubprocessEmbedder(std::string command,
                              std::chrono::milliseconds timeout = backend_timeout_from_env());
  ~SubprocessEmbedder() override;

  Embedding embed(const ImageRaster& crop) override;

private:
  SubprocessChannel channel_;
  std::filesystem::path scratch_dir_;
};

}  // namespace crowdcount
