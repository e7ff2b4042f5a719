#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "crowdcount/matchkit.hpp"

namespace crowdcount {

inline constexpr std::size_t kDefaultStride = 10;

struct FrameStream {
  std::vector<std::size_t> indices;  // strictly increasing
  double fps = 25.0;

  static FrameStream contiguous(std::size_t n_frames, double fps = 25.0);
};

// Every stride-th frame of the stream, starting with the first.
std::vector<std::size_t> sample_frames(const FrameStream& stream, std::size_t stride);

struct CounterConfig {
  MatchOptions match;
  std::size_t gallery_depth = 1;  // analyzed frames kept for matching
  FaceModelConfig models;
};

struct FrameLog {
  std::size_t frame = 0;
  std::size_t detected = 0;
  std::size_t new_faces = 0;
  std::size_t matched = 0;
};

// Faces of one analyzed frame together with their trained models. `tracks`
// assigns each face the person it was counted as.
struct GalleryFrame {
  std::vector<FaceInstance> faces;
  std::vector<LinearSVM> models;
  std::vector<std::size_t> tracks;
};

struct CountState {
  std::deque<GalleryFrame> gallery;  // most recent frame first
  std::size_t running_total = 0;
  std::vector<FrameLog> log;
};

// Matches the new frame against the gallery, counts unmatched faces as new
// people and makes the frame the newest gallery entry. Each gallery person is
// claimed by at most one new face, greedily by descending score.
void update_count(CountState& state, std::span<const FaceInstance> frame_faces,
                  std::size_t frame_index, const CounterConfig& config, PositiveSource& source);

struct CountResult {
  std::size_t total = 0;
  std::vector<FrameLog> log;
};

// Throws InvalidInput when no frame has been processed.
CountResult final_count(const CountState& state);

// 100 (1 - |predicted - truth| / truth), floored at 0.
double count_accuracy(std::size_t predicted, std::size_t ground_truth);

}  // namespace crowdcount
