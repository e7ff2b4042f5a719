#include "crowdcount/counter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>

#include "crowdcount/error.hpp"

namespace crowdcount {
namespace {

struct Claim {
  double score;
  double distance;
  std::size_t gallery_frame;
  std::size_t gallery_face;
  std::size_t new_face;
  std::size_t track;
};

}  // namespace

FrameStream FrameStream::contiguous(std::size_t n_frames, double fps) {
  FrameStream s;
  s.fps = fps;
  s.indices.resize(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) s.indices[i] = i;
  return s;
}

std::vector<std::size_t> sample_frames(const FrameStream& stream, std::size_t stride) {
  if (stride < 1) throw InvalidInput("sample_frames: stride must be >= 1");
  for (std::size_t i = 1; i < stream.indices.size(); ++i) {
    if (stream.indices[i] <= stream.indices[i - 1]) {
      throw InvalidInput("sample_frames: frame indices must be strictly increasing");
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t pos = 0; pos < stream.indices.size(); pos += stride) out.push_back(stream.indices[pos]);
  return out;
}

void update_count(CountState& state, std::span<const FaceInstance> frame_faces, std::size_t frame_index,
                  const CounterConfig& config, PositiveSource& source) {
  if (config.gallery_depth < 1) throw InvalidInput("update_count: gallery_depth must be >= 1");
  std::set<std::string> ids;
  for (const auto& f : frame_faces) {
    if (f.frame_index != frame_index) {
      throw InvalidInput("update_count: face " + f.face_id + " belongs to frame " +
                         std::to_string(f.frame_index) + ", not " + std::to_string(frame_index));
    }
    if (!ids.insert(f.face_id).second) {
      throw InvalidInput("update_count: duplicate face id " + f.face_id + " in frame " + std::to_string(frame_index));
    }
  }
  if (!state.log.empty() && frame_index <= state.log.back().frame) {
    throw InvalidInput("update_count: frames must be processed in increasing order");
  }

  std::vector<Embedding> unit(frame_faces.size());
  for (std::size_t j = 0; j < frame_faces.size(); ++j) unit[j] = frame_faces[j].embedding.normalized();

  std::vector<Claim> claims;
  for (std::size_t g = 0; g < state.gallery.size(); ++g) {
    const GalleryFrame& past = state.gallery[g];
    for (std::size_t a = 0; a < past.models.size(); ++a) {
      const Box2D& anchor = past.faces[a].box;
      for (std::size_t j = 0; j < frame_faces.size(); ++j) {
        const Box2D& box = frame_faces[j].box;
        if (!in_neighborhood(anchor, box, config.match.neighborhood_px)) continue;
        const double score = svm_score(past.models[a], unit[j]);
        if (!(score > config.match.threshold)) continue;
        claims.push_back({score, std::hypot(box.center_x() - anchor.center_x(), box.center_y() - anchor.center_y()),
                          g, a, j, past.tracks[a]});
      }
    }
  }
  std::sort(claims.begin(), claims.end(), [](const Claim& l, const Claim& r) {
    if (l.score != r.score) return l.score > r.score;
    if (l.distance != r.distance) return l.distance < r.distance;
    if (l.gallery_frame != r.gallery_frame) return l.gallery_frame < r.gallery_frame;
    if (l.gallery_face != r.gallery_face) return l.gallery_face < r.gallery_face;
    return l.new_face < r.new_face;
  });

  std::vector<std::optional<std::size_t>> assigned(frame_faces.size());
  std::set<std::size_t> claimed_tracks;
  for (const auto& c : claims) {
    if (assigned[c.new_face] || claimed_tracks.count(c.track)) continue;
    assigned[c.new_face] = c.track;
    claimed_tracks.insert(c.track);
  }

  GalleryFrame entry;
  entry.faces.assign(frame_faces.begin(), frame_faces.end());
  entry.tracks.resize(frame_faces.size());
  std::size_t matched = 0;
  for (std::size_t j = 0; j < frame_faces.size(); ++j) {
    if (assigned[j]) {
      entry.tracks[j] = *assigned[j];
      ++matched;
    } else {
      entry.tracks[j] = state.running_total++;
    }
  }
  state.log.push_back({frame_index, frame_faces.size(), frame_faces.size() - matched, matched});

  // Models are only needed if a later frame can be matched against them.
  if (config.match.threshold < std::numeric_limits<double>::infinity()) {
    std::span<const FaceInstance> fallback;
    std::unordered_map<std::string, std::size_t> fallback_tracks, own_tracks;
    if (!state.gallery.empty()) {
      const GalleryFrame& previous = state.gallery.front();
      fallback = previous.faces;
      for (std::size_t i = 0; i < previous.faces.size(); ++i) fallback_tracks[previous.faces[i].face_id] = previous.tracks[i];
    }
    for (std::size_t j = 0; j < frame_faces.size(); ++j) own_tracks[frame_faces[j].face_id] = entry.tracks[j];
    // A previous-frame face of the same person is never a negative.
    const FallbackFilter same_person = [&](const FaceInstance& face, const FaceInstance& candidate) {
      return own_tracks.at(face.face_id) == fallback_tracks.at(candidate.face_id);
    };
    entry.models = train_face_models(entry.faces, fallback, same_person, config.models, source);
  }

  state.gallery.push_front(std::move(entry));
  while (state.gallery.size() > config.gallery_depth) state.gallery.pop_back();
}

CountResult final_count(const CountState& state) {
  if (state.log.empty()) throw InvalidInput("final_count: no frame has been processed");
  return {state.running_total, state.log};
}

double count_accuracy(std::size_t predicted, std::size_t ground_truth) {
  if (ground_truth == 0) throw InvalidInput("count_accuracy: ground truth count must be >= 1");
  const double gap = std::abs(static_cast<double>(predicted) - static_cast<double>(ground_truth));
  return std::max(0.0, 100.0 * (1.0 - gap / static_cast<double>(ground_truth)));
}

}  // namespace crowdcount
