#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowdcount/embedding.hpp"
#include "crowdcount/image.hpp"
#include "crowdcount/svm.hpp"

namespace crowdcount {

// Turns a face crop into an embedding. One request at a time per instance.
class EmbedderBackend {
public:
  virtual ~EmbedderBackend() = default;
  virtual Embedding embed(const ImageRaster& crop) = 0;
};

// Returns the frame with the given index, or nullptr past the end of the clip.
using FrameAccessor = std::function<const ImageRaster*(std::size_t frame_index)>;

struct AugmentationSpec {
  std::size_t propagate_frames = 2;
  double gaussian_sigma = 5.0 / 255.0;  // fraction of the 0..255 range
  int channel_shift_max = 10;           // pixel-value units
  std::size_t target_positives = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

// Same-box crops from frames t .. t + propagate_frames, then photometric
// copies (Gaussian pixel noise plus one uniform shift per channel) cycling
// over those crops until target_positives embeddings exist. The first
// embeddings come from the unaugmented crops. Frames missing at the clip end
// are replaced by extra augmented copies. Output is unit-norm.
std::vector<Embedding> build_positives(const FaceInstance& face, const FrameAccessor& frames,
                                       const AugmentationSpec& spec, EmbedderBackend& embedder);

// Photometric augmentation of one crop.
ImageRaster augment_crop(const ImageRaster& crop, double gaussian_sigma, int channel_shift_max,
                         std::uint64_t seed);

// Positives for runs that only have stored embeddings: the face's own
// embedding followed by Gaussian perturbations of expected norm `jitter`.
struct JitterSpec {
  std::size_t target_positives = 10;
  double jitter = 0.1;
  std::uint64_t seed = 0;
};

std::vector<Embedding> jitter_positives(const FaceInstance& face, const JitterSpec& spec);

struct NegativeSample {
  std::vector<Embedding> embeddings;
  std::vector<std::size_t> pool_indices;
  bool with_replacement = false;
};

// n embeddings drawn from `pool` without replacement. A pool smaller than n
// is used whole and topped up with replacement draws (flagged). Entries equal
// to the query face (same frame and id) are skipped. Throws InvalidInput when
// nothing is left to draw from.
NegativeSample sample_negatives(const FaceInstance& face, std::span<const FaceInstance> pool,
                                std::size_t n, std::uint64_t seed);

struct MatchOptions {
  double neighborhood_px = 600.0;  // side of the square search window
  double threshold = 0.0;
};

struct MatchDecision {
  const FaceInstance* query = nullptr;
  std::optional<std::size_t> best_candidate;  // index into the candidate span
  double score = -std::numeric_limits<double>::infinity();
  bool accepted = false;
};

// True when the center of `candidate` lies in the axis-aligned square of side
// `side` centered on the center of `query` (boundary included).
bool in_neighborhood(const Box2D& query, const Box2D& candidate, double side) noexcept;

// Scores every candidate inside the neighborhood with the query's model and
// accepts the best one if its score exceeds the threshold. Equal scores go to
// the candidate closer to the query. All candidates must share one frame.
MatchDecision match_face(const FaceInstance& query, const LinearSVM& model,
                         std::span<const FaceInstance> candidates, const MatchOptions& options);

struct LabeledScore {
  double score = 0.0;
  bool is_match = false;
};

struct ThresholdQuality {
  double precision = 0.0;
  double recall = 0.0;
  double f_half = 0.0;
};

// Pairs with score > threshold are predicted matches; precision is 0 when
// nothing is predicted.
ThresholdQuality evaluate_threshold(std::span<const LabeledScore> labeled, double threshold);

struct Calibration {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_half = 0.0;
  std::size_t n_pairs = 0;
};

// Scans the midpoints between consecutive distinct scores plus -inf and +inf
// and keeps the threshold of maximal F0.5; ties go to the larger threshold.
// Throws InvalidInput unless both classes are present.
Calibration calibrate_threshold(std::span<const LabeledScore> labeled);

struct CrossValidation {
  Calibration calibration;          // fitted on all pairs
  std::vector<double> fold_f_half;  // held-out F0.5 per fold
  double mean_f_half = 0.0;
};

// k-fold estimate of the calibrated threshold's F0.5. Folds are a seeded
// stratified split; folds = 1 reduces to calibrate_threshold alone.
CrossValidation cross_validate_threshold(std::span<const LabeledScore> labeled, std::size_t folds,
                                         std::uint64_t seed);

// Where positives for one face come from.
class PositiveSource {
public:
  virtual ~PositiveSource() = default;
  virtual std::vector<Embedding> positives(const FaceInstance& face, std::uint64_t seed) = 0;
  // Whether positives() may be called concurrently.
  virtual bool concurrent() const noexcept = 0;
};

class JitterPositiveSource final : public PositiveSource {
public:
  explicit JitterPositiveSource(JitterSpec spec = {}) : spec_(spec) {}
  std::vector<Embedding> positives(const FaceInstance& face, std::uint64_t seed) override;
  bool concurrent() const noexcept override { return true; }

private:
  JitterSpec spec_;
};

class ImagePositiveSource final : public PositiveSource {
public:
  ImagePositiveSource(FrameAccessor frames, EmbedderBackend& embedder, AugmentationSpec spec = {})
      : frames_(std::move(frames)), embedder_(embedder), spec_(spec) {}
  std::vector<Embedding> positives(const FaceInstance& face, std::uint64_t seed) override;
  bool concurrent() const noexcept override { return false; }

private:
  FrameAccessor frames_;
  EmbedderBackend& embedder_;
  AugmentationSpec spec_;
};

struct FaceModelConfig {
  std::size_t n_negatives = 10;
  SvmHyperparameters svm;
  std::uint64_t seed = 0;
};

// Negatives come from the other faces of the same list. When fewer than
// n_negatives exist, `fallback` (faces of neighboring frames) tops the pool
// up, skipping entries for which `excluded(face, candidate)` holds. If the
// pool is still short, seeded random unit vectors fill the remaining slots.
using FallbackFilter = std::function<bool(const FaceInstance& face, const FaceInstance& candidate)>;

// Seed of one face's model, derived from the config seed, frame and face id.
std::uint64_t face_seed(std::uint64_t base, const FaceInstance& face) noexcept;

// One-vs-all models for every face of a frame, trained in parallel.
std::vector<LinearSVM> train_face_models(std::span<const FaceInstance> faces,
                                         std::span<const FaceInstance> fallback,
                                         const FallbackFilter& excluded,
                                         const FaceModelConfig& config, PositiveSource& source);

namespace detail {
// Negative set for faces[index]; shared by the parallel and serial trainers.
std::vector<Embedding> negatives_for(std::span<const FaceInstance> faces, std::size_t index,
                                     std::span<const FaceInstance> fallback,
                                     const FallbackFilter& excluded, const FaceModelConfig& config);
}  // namespace detail

}  // namespace crowdcount
