#include "crowdcount/matchkit.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numeric>

#include "crowdcount/error.hpp"
#include "crowdcount/metrics.hpp"
#include "parallel.hpp"
#include "random_util.hpp"

namespace crowdcount {
namespace {

constexpr double kHalfBeta = 0.5;

Embedding random_unit(rng::Generator& gen) {
  Embedding e;
  for (auto& v : e.values) v = gen.normal();
  return e.normalized();
}

}  // namespace

void AugmentationSpec::validate() const {
  if (target_positives < 1 + propagate_frames) {
    throw InvalidInput("augmentation: target_positives must be at least 1 + propagate_frames");
  }
  if (!(gaussian_sigma >= 0.0) || channel_shift_max < 0) {
    throw InvalidInput("augmentation: noise magnitudes must be non-negative");
  }
}

ImageRaster augment_crop(const ImageRaster& crop, double gaussian_sigma, int channel_shift_max,
                         std::uint64_t seed) {
  rng::Generator gen(seed);
  std::array<long long, ImageRaster::kChannels> shift{};
  for (auto& s : shift) s = gen.integer(-channel_shift_max, channel_shift_max);
  const double sigma = gaussian_sigma * 255.0;

  ImageRaster out = crop;
  auto data = out.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double noise = sigma > 0.0 ? sigma * gen.normal() : 0.0;
    const double v = static_cast<double>(data[i]) + noise + static_cast<double>(shift[i % ImageRaster::kChannels]);
    data[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return out;
}

std::vector<Embedding> build_positives(const FaceInstance& face, const FrameAccessor& frames,
                                       const AugmentationSpec& spec, EmbedderBackend& embedder) {
  spec.validate();
  std::vector<ImageRaster> base;
  for (std::size_t k = 0; k <= spec.propagate_frames; ++k) {
    const ImageRaster* frame = frames(face.frame_index + k);
    if (frame == nullptr) {
      if (k == 0) throw InvalidInput("build_positives: frame " + std::to_string(face.frame_index) + " unavailable");
      break;
    }
    base.push_back(crop(*frame, face.box));
  }

  std::vector<Embedding> out;
  out.reserve(spec.target_positives);
  for (const auto& c : base) out.push_back(embedder.embed(c).normalized());
  for (std::size_t k = 0; out.size() < spec.target_positives; ++k) {
    const ImageRaster& source = base[k % base.size()];
    const auto augmented =
        augment_crop(source, spec.gaussian_sigma, spec.channel_shift_max, rng::mix(spec.seed + k));
    out.push_back(embedder.embed(augmented).normalized());
  }
  return out;
}

std::vector<Embedding> jitter_positives(const FaceInstance& face, const JitterSpec& spec) {
  if (spec.target_positives < 1) throw InvalidInput("jitter_positives: target_positives must be >= 1");
  const Embedding base = face.embedding.normalized();
  const double per_axis = spec.jitter / std::sqrt(static_cast<double>(kEmbeddingDim));
  rng::Generator gen(spec.seed);

  std::vector<Embedding> out{base};
  out.reserve(spec.target_positives);
  while (out.size() < spec.target_positives) {
    Embedding e = base;
    for (auto& v : e.values) v += per_axis * gen.normal();
    out.push_back(e.normalized());
  }
  return out;
}

std::vector<Embedding> JitterPositiveSource::positives(const FaceInstance& face, std::uint64_t seed) {
  JitterSpec spec = spec_;
  spec.seed = seed;
  return jitter_positives(face, spec);
}

std::vector<Embedding> ImagePositiveSource::positives(const FaceInstance& face, std::uint64_t seed) {
  AugmentationSpec spec = spec_;
  spec.seed = seed;
  return build_positives(face, frames_, spec, embedder_);
}

NegativeSample sample_negatives(const FaceInstance& face, std::span<const FaceInstance> pool,
                                std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].frame_index == face.frame_index && pool[i].face_id == face.face_id) continue;
    eligible.push_back(i);
  }
  if (eligible.empty()) throw InvalidInput("sample_negatives: empty negative pool for face " + face.face_id);

  rng::Generator gen(seed);
  NegativeSample out;
  if (eligible.size() >= n) {
    for (std::size_t i = 0; i < n; ++i) {
      std::swap(eligible[i], eligible[i + gen.below(eligible.size() - i)]);
      out.pool_indices.push_back(eligible[i]);
    }
  } else {
    // Use every face once, then top up with replacement.
    out.with_replacement = true;
    gen.shuffle(eligible);
    out.pool_indices = eligible;
    while (out.pool_indices.size() < n) out.pool_indices.push_back(eligible[gen.below(eligible.size())]);
  }
  out.embeddings.reserve(n);
  for (std::size_t i : out.pool_indices) out.embeddings.push_back(pool[i].embedding.normalized());
  return out;
}

bool in_neighborhood(const Box2D& query, const Box2D& candidate, double side) noexcept {
  const double half = 0.5 * side;
  return std::abs(candidate.center_x() - query.center_x()) <= half &&
         std::abs(candidate.center_y() - query.center_y()) <= half;
}

MatchDecision match_face(const FaceInstance& query, const LinearSVM& model,
                         std::span<const FaceInstance> candidates, const MatchOptions& options) {
  for (const auto& c : candidates) {
    if (c.frame_index != candidates.front().frame_index) {
      throw InvalidInput("match_face: candidates must come from a single frame");
    }
  }
  MatchDecision decision;
  decision.query = &query;
  double best_distance = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (!in_neighborhood(query.box, c.box, options.neighborhood_px)) continue;
    const double score = svm_score(model, c.embedding.normalized());
    const double distance = std::hypot(c.box.center_x() - query.box.center_x(),
                                       c.box.center_y() - query.box.center_y());
    if (!decision.best_candidate || score > decision.score ||
        (score == decision.score && distance < best_distance)) {
      decision.best_candidate = i;
      decision.score = score;
      best_distance = distance;
    }
  }
  decision.accepted = decision.best_candidate.has_value() && decision.score > options.threshold;
  return decision;
}

ThresholdQuality evaluate_threshold(std::span<const LabeledScore> labeled, double threshold) {
  std::size_t tp = 0, fp = 0, positives = 0;
  for (const auto& l : labeled) {
    if (l.is_match) ++positives;
    if (l.score > threshold) (l.is_match ? tp : fp)++;
  }
  ThresholdQuality q;
  q.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  q.recall = positives == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(positives);
  q.f_half = f_beta(q.precision, q.recall, kHalfBeta);
  return q;
}

Calibration calibrate_threshold(std::span<const LabeledScore> labeled) {
  std::size_t positives = 0;
  for (const auto& l : labeled) {
    if (!std::isfinite(l.score)) throw InvalidInput("calibrate_threshold: non-finite score");
    positives += l.is_match ? 1 : 0;
  }
  if (positives == 0 || positives == labeled.size()) {
    throw InvalidInput("calibrate_threshold: need both matching and non-matching pairs");
  }

  std::vector<LabeledScore> sorted(labeled.begin(), labeled.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.score < b.score; });

  // Candidates ascending: -inf, midpoints, +inf. Walking up, everything below
  // the candidate stops being predicted as a match.
  const double inf = std::numeric_limits<double>::infinity();
  std::size_t tp = positives;
  std::size_t fp = labeled.size() - positives;
  Calibration best;
  best.n_pairs = labeled.size();
  best.f_half = -1.0;
  auto consider = [&](double threshold) {
    ThresholdQuality q;
    q.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    q.recall = static_cast<double>(tp) / static_cast<double>(positives);
    q.f_half = f_beta(q.precision, q.recall, kHalfBeta);
    if (q.f_half >= best.f_half) {
      best.threshold = threshold;
      best.precision = q.precision;
      best.recall = q.recall;
      best.f_half = q.f_half;
    }
  };

  consider(-inf);
  for (std::size_t i = 0; i < sorted.size();) {
    const double s = sorted[i].score;
    for (; i < sorted.size() && sorted[i].score == s; ++i) (sorted[i].is_match ? tp : fp)--;
    consider(i < sorted.size() ? 0.5 * (s + sorted[i].score) : inf);
  }
  return best;
}

CrossValidation cross_validate_threshold(std::span<const LabeledScore> labeled, std::size_t folds,
                                         std::uint64_t seed) {
  if (folds < 1) throw InvalidInput("cross_validate_threshold: folds must be >= 1");
  CrossValidation cv;
  cv.calibration = calibrate_threshold(labeled);
  if (folds == 1) {
    cv.mean_f_half = cv.calibration.f_half;
    return cv;
  }

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labeled.size(); ++i) (labeled[i].is_match ? pos : neg).push_back(i);
  if (pos.size() < folds || neg.size() < folds) {
    throw InvalidInput("cross_validate_threshold: each class needs at least one pair per fold");
  }
  rng::Generator gen(seed);
  gen.shuffle(pos);
  gen.shuffle(neg);
  std::vector<std::size_t> fold_of(labeled.size());
  for (std::size_t i = 0; i < pos.size(); ++i) fold_of[pos[i]] = i % folds;
  for (std::size_t i = 0; i < neg.size(); ++i) fold_of[neg[i]] = i % folds;

  double sum = 0.0;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<LabeledScore> train, held_out;
    for (std::size_t i = 0; i < labeled.size(); ++i) (fold_of[i] == f ? held_out : train).push_back(labeled[i]);
    const Calibration fitted = calibrate_threshold(train);
    const double f_half = evaluate_threshold(held_out, fitted.threshold).f_half;
    cv.fold_f_half.push_back(f_half);
    sum += f_half;
  }
  cv.mean_f_half = sum / static_cast<double>(folds);
  return cv;
}

std::uint64_t face_seed(std::uint64_t base, const FaceInstance& face) noexcept {
  return rng::mix(rng::mix(base ^ rng::mix(face.frame_index)) ^ rng::fnv1a(face.face_id));
}

namespace detail {

std::vector<Embedding> negatives_for(std::span<const FaceInstance> faces, std::size_t index,
                                     std::span<const FaceInstance> fallback,
                                     const FallbackFilter& excluded, const FaceModelConfig& config) {
  const FaceInstance& face = faces[index];
  std::vector<FaceInstance> pool;
  for (std::size_t j = 0; j < faces.size(); ++j) {
    if (j != index) pool.push_back(faces[j]);
  }
  if (pool.size() < config.n_negatives) {
    for (const auto& c : fallback) {
      if (!excluded || !excluded(face, c)) pool.push_back(c);
    }
  }
  const std::uint64_t seed = rng::mix(face_seed(config.seed, face) ^ 0x6e65676174697665ULL);
  if (pool.size() >= config.n_negatives) return sample_negatives(face, pool, config.n_negatives, seed).embeddings;

  // Too few real faces: use them all and fill up with random unit vectors,
  // which stand in for unrelated people.
  std::vector<Embedding> out;
  for (const auto& c : pool) out.push_back(c.embedding.normalized());
  rng::Generator gen(seed);
  while (out.size() < config.n_negatives) out.push_back(random_unit(gen));
  return out;
}

}  // namespace detail

std::vector<LinearSVM> train_face_models(std::span<const FaceInstance> faces,
                                         std::span<const FaceInstance> fallback,
                                         const FallbackFilter& excluded,
                                         const FaceModelConfig& config, PositiveSource& source) {
  if (config.n_negatives < 1) throw InvalidInput("train_face_models: n_negatives must be >= 1");
  std::vector<std::vector<Embedding>> positives(faces.size());
  auto build = [&](std::size_t i) { positives[i] = source.positives(faces[i], face_seed(config.seed, faces[i])); };
  if (source.concurrent()) {
    detail::parallel_for(faces.size(), build);
  } else {
    for (std::size_t i = 0; i < faces.size(); ++i) build(i);
  }

  std::vector<LinearSVM> models(faces.size());
  detail::parallel_for(faces.size(), [&](std::size_t i) {
    const auto negatives = detail::negatives_for(faces, i, fallback, excluded, config);
    SvmHyperparameters hp = config.svm;
    hp.seed = face_seed(config.seed ^ config.svm.seed, faces[i]);
    models[i] = train_svm(positives[i], negatives, hp);
  });
  return models;
}

}  // namespace crowdcount
