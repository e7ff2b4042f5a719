#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "crowdcount/geometry.hpp"

namespace crowdcount {

inline constexpr double kDefaultIouThreshold = 0.5;

struct MatchedPair {
  std::size_t prediction = 0;
  std::size_t ground_truth = 0;
  double iou = 0.0;
};

struct MatchResult {
  std::vector<MatchedPair> pairs;
  std::vector<std::size_t> unmatched_predictions;
  std::vector<std::size_t> unmatched_ground_truth;

  std::size_t true_positives() const noexcept { return pairs.size(); }
  std::size_t false_positives() const noexcept { return unmatched_predictions.size(); }
};

struct PRPoint {
  double score_threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;

  friend bool operator==(const PRPoint&, const PRPoint&) = default;
};

// Predictions and ground truth of one image.
struct ImageEval {
  std::string image_id;
  std::vector<ScoredBox> predictions;
  std::vector<Box2D> ground_truth;
};

enum class ApMode { pooled, per_image_mean };

struct EvalOptions {
  double iou_threshold = kDefaultIouThreshold;
  ApMode ap_mode = ApMode::pooled;
};

struct ImageStats {
  std::string image_id;
  std::size_t n_gt = 0;
  std::size_t n_predictions = 0;
  std::size_t true_positives = 0;
  double tp_gt_ratio = 0.0;
  double mean_jaccard = 0.0;
};

struct EvalReport {
  double tp_gt_ratio = 0.0;
  double average_precision = 0.0;
  double mean_jaccard = 0.0;
  std::vector<PRPoint> pr_curve;
  std::size_t n_images = 0;
  std::size_t n_gt = 0;
  std::size_t n_predictions = 0;
  std::size_t n_true_positives = 0;
  ApMode ap_mode = ApMode::pooled;
  std::vector<ImageStats> per_image;
  std::vector<std::string> warnings;
};

// Greedy assignment: predictions in descending score order (ties keep input
// order) each claim the unclaimed ground-truth box of highest IoU, provided
// that IoU is strictly above iou_threshold. Equal IoU prefers the lower GT index.
MatchResult match_detections(std::span<const ScoredBox> predictions,
                             std::span<const Box2D> ground_truth,
                             double iou_threshold = kDefaultIouThreshold);

// Matched pairs over ground-truth count; 0 for an empty image without pairs.
double tp_gt_ratio(const MatchResult& result, std::size_t n_ground_truth);

// Pooled precision/recall sweep, one point per distinct prediction score,
// ordered by decreasing threshold. Throws InvalidInput when the dataset has
// no ground truth.
std::vector<PRPoint> pr_curve(std::span<const ImageEval> images,
                              double iou_threshold = kDefaultIouThreshold);

// All-points interpolated area under the curve. Throws on an empty curve.
double average_precision(std::span<const PRPoint> curve);

// Mean IoU over every matched pair; 0 when there are none.
double mean_jaccard(std::span<const MatchResult> results);

double f_beta(double precision, double recall, double beta);

// Matches every image (in parallel) and aggregates the dataset report.
EvalReport evaluate(std::span<const ImageEval> images, const EvalOptions& options = {});

const char* to_string(ApMode mode) noexcept;
ApMode parse_ap_mode(const std::string& text);

}  // namespace crowdcount
