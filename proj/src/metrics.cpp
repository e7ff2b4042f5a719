#include "crowdcount/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "crowdcount/error.hpp"

namespace crowdcount {
namespace {

std::vector<std::size_t> score_order(std::span<const ScoredBox> predictions) {
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].score > predictions[b].score;
  });
  return order;
}

struct PooledPrediction {
  double score;
  bool true_positive;
};

// Greedy matching visits predictions by descending score, so the matching of
// the predictions scoring >= t is the prefix of the full matching. One pass per
// image therefore labels every prediction for every threshold.
std::vector<PRPoint> sweep(std::vector<PooledPrediction> pooled, std::size_t n_gt) {
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const auto& a, const auto& b) { return a.score > b.score; });
  std::vector<PRPoint> curve;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < pooled.size();) {
    const double threshold = pooled[i].score;
    for (; i < pooled.size() && pooled[i].score == threshold; ++i) {
      if (pooled[i].true_positive) ++tp;
    }
    curve.push_back({threshold, static_cast<double>(tp) / static_cast<double>(i),
                     static_cast<double>(tp) / static_cast<double>(n_gt)});
  }
  return curve;
}

void append_labels(const ImageEval& image, const MatchResult& match,
                   std::vector<PooledPrediction>& pooled) {
  std::vector<bool> tp(image.predictions.size(), false);
  for (const auto& p : match.pairs) tp[p.prediction] = true;
  for (std::size_t i = 0; i < image.predictions.size(); ++i) {
    pooled.push_back({image.predictions[i].score, tp[i]});
  }
}

std::vector<MatchResult> match_all(std::span<const ImageEval> images, double iou_threshold) {
  std::vector<MatchResult> results(images.size());
  const auto n = static_cast<std::ptrdiff_t>(images.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    results[i] = match_detections(images[i].predictions, images[i].ground_truth, iou_threshold);
  }
  return results;
}

}  // namespace

MatchResult match_detections(std::span<const ScoredBox> predictions,
                             std::span<const Box2D> ground_truth, double iou_threshold) {
  for (const auto& p : predictions) require_valid(p);
  for (const auto& g : ground_truth) require_valid(g);

  MatchResult result;
  std::vector<bool> claimed(ground_truth.size(), false);
  for (std::size_t pi : score_order(predictions)) {
    std::size_t best = ground_truth.size();
    double best_iou = iou_threshold;
    for (std::size_t gi = 0; gi < ground_truth.size(); ++gi) {
      if (claimed[gi]) continue;
      const double v = iou(predictions[pi].box, ground_truth[gi]);
      if (v > best_iou) {
        best_iou = v;
        best = gi;
      }
    }
    if (best == ground_truth.size()) {
      result.unmatched_predictions.push_back(pi);
    } else {
      claimed[best] = true;
      result.pairs.push_back({pi, best, best_iou});
    }
  }
  for (std::size_t gi = 0; gi < ground_truth.size(); ++gi) {
    if (!claimed[gi]) result.unmatched_ground_truth.push_back(gi);
  }
  return result;
}

double tp_gt_ratio(const MatchResult& result, std::size_t n_ground_truth) {
  if (n_ground_truth < result.pairs.size()) {
    throw InvalidInput("tp_gt_ratio: more matched pairs than ground-truth boxes");
  }
  if (n_ground_truth == 0) return 0.0;
  return static_cast<double>(result.pairs.size()) / static_cast<double>(n_ground_truth);
}

std::vector<PRPoint> pr_curve(std::span<const ImageEval> images, double iou_threshold) {
  std::size_t n_gt = 0;
  for (const auto& image : images) n_gt += image.ground_truth.size();
  if (n_gt == 0) throw InvalidInput("pr_curve: dataset has no ground-truth boxes");

  const auto matches = match_all(images, iou_threshold);
  std::vector<PooledPrediction> pooled;
  for (std::size_t i = 0; i < images.size(); ++i) append_labels(images[i], matches[i], pooled);
  return sweep(std::move(pooled), n_gt);
}

double average_precision(std::span<const PRPoint> curve) {
  if (curve.empty()) throw InvalidInput("average_precision: empty curve");
  std::vector<PRPoint> points(curve.begin(), curve.end());
  std::stable_sort(points.begin(), points.end(),
                   [](const auto& a, const auto& b) { return a.recall < b.recall; });

  // Precision envelope: best precision at this recall or any higher one.
  std::vector<double> envelope(points.size());
  double running = 0.0;
  for (std::size_t i = points.size(); i-- > 0;) {
    running = std::max(running, points[i].precision);
    envelope[i] = running;
  }

  double area = 0.0;
  double previous_recall = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    area += (points[i].recall - previous_recall) * envelope[i];
    previous_recall = points[i].recall;
  }
  return std::clamp(area, 0.0, 1.0);
}

double mean_jaccard(std::span<const MatchResult> results) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : results) {
    for (const auto& p : r.pairs) sum += p.iou;
    n += r.pairs.size();
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double f_beta(double precision, double recall, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidInput("f_beta: beta must be positive");
  if (precision < 0.0 || precision > 1.0 || recall < 0.0 || recall > 1.0) {
    throw InvalidInput("f_beta: precision and recall must lie in [0, 1]");
  }
  const double b2 = beta * beta;
  const double denominator = b2 * precision + recall;
  if (denominator == 0.0) return 0.0;
  return (1.0 + b2) * precision * recall / denominator;
}

EvalReport evaluate(std::span<const ImageEval> images, const EvalOptions& options) {
  EvalReport report;
  report.ap_mode = options.ap_mode;
  report.n_images = images.size();
  for (const auto& image : images) {
    report.n_gt += image.ground_truth.size();
    report.n_predictions += image.predictions.size();
  }
  if (report.n_gt == 0) throw InvalidInput("evaluate: dataset has no ground-truth boxes");

  const auto matches = match_all(images, options.iou_threshold);

  std::vector<PooledPrediction> pooled;
  pooled.reserve(report.n_predictions);
  report.per_image.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    append_labels(images[i], matches[i], pooled);
    report.n_true_positives += matches[i].pairs.size();
    ImageStats stats;
    stats.image_id = images[i].image_id;
    stats.n_gt = images[i].ground_truth.size();
    stats.n_predictions = images[i].predictions.size();
    stats.true_positives = matches[i].pairs.size();
    stats.tp_gt_ratio = tp_gt_ratio(matches[i], stats.n_gt);
    stats.mean_jaccard = mean_jaccard(std::span(&matches[i], 1));
    report.per_image.push_back(std::move(stats));
  }

  report.tp_gt_ratio =
      static_cast<double>(report.n_true_positives) / static_cast<double>(report.n_gt);
  report.mean_jaccard = mean_jaccard(matches);
  report.pr_curve = sweep(std::move(pooled), report.n_gt);

  if (options.ap_mode == ApMode::pooled) {
    report.average_precision =
        report.pr_curve.empty() ? 0.0 : average_precision(report.pr_curve);
  } else {
    double sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (images[i].ground_truth.empty()) continue;
      std::vector<PooledPrediction> own;
      append_labels(images[i], matches[i], own);
      const auto curve = sweep(std::move(own), images[i].ground_truth.size());
      sum += curve.empty() ? 0.0 : average_precision(curve);
      ++counted;
    }
    report.average_precision = sum / static_cast<double>(counted);
  }
  return report;
}

const char* to_string(ApMode mode) noexcept {
  return mode == ApMode::pooled ? "pooled" : "per-image-mean";
}

ApMode parse_ap_mode(const std::string& text) {
  if (text == "pooled") return ApMode::pooled;
  if (text == "per-image-mean") return ApMode::per_image_mean;
  throw InvalidInput("unknown AP mode '" + text + "' (expected pooled or per-image-mean)");
}

}  // namespace crowdcount
