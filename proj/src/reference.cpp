#include "crowdcount/reference.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "crowdcount/error.hpp"

namespace crowdcount::reference {

std::vector<ScoredBox> nms(std::span<const ScoredBox> boxes, double overlap_threshold) {
  for (const auto& b : boxes) require_valid(b);
  std::vector<bool> alive(boxes.size(), true);
  std::vector<ScoredBox> kept;
  for (;;) {
    std::size_t best = boxes.size();
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (alive[i] && (best == boxes.size() || boxes[i].score > boxes[best].score)) best = i;
    }
    if (best == boxes.size()) return kept;
    alive[best] = false;
    kept.push_back(boxes[best]);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (alive[i] && crowdcount::iou(boxes[best].box, boxes[i].box) > overlap_threshold) alive[i] = false;
    }
  }
}

std::vector<double> iou_matrix(std::span<const Box2D> a, std::span<const Box2D> b) {
  std::vector<double> out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a) {
    for (const auto& y : b) out.push_back(crowdcount::iou(x, y));
  }
  return out;
}

std::vector<PRPoint> pr_curve(std::span<const ImageEval> images, double iou_threshold) {
  std::size_t n_gt = 0;
  std::set<double, std::greater<>> thresholds;
  for (const auto& image : images) {
    n_gt += image.ground_truth.size();
    for (const auto& p : image.predictions) thresholds.insert(p.score);
  }
  if (n_gt == 0) throw InvalidInput("pr_curve: dataset has no ground-truth boxes");

  std::vector<PRPoint> curve;
  for (double t : thresholds) {
    std::size_t tp = 0, kept = 0;
    for (const auto& image : images) {
      std::vector<ScoredBox> surviving;
      for (const auto& p : image.predictions) {
        if (p.score >= t) surviving.push_back(p);
      }
      kept += surviving.size();
      tp += match_detections(surviving, image.ground_truth, iou_threshold).pairs.size();
    }
    curve.push_back({t, static_cast<double>(tp) / static_cast<double>(kept),
                     static_cast<double>(tp) / static_cast<double>(n_gt)});
  }
  return curve;
}

EvalReport evaluate(std::span<const ImageEval> images, const EvalOptions& options) {
  EvalReport report;
  report.ap_mode = options.ap_mode;
  report.n_images = images.size();
  std::vector<MatchResult> matches;
  for (const auto& image : images) {
    report.n_gt += image.ground_truth.size();
    report.n_predictions += image.predictions.size();
    matches.push_back(match_detections(image.predictions, image.ground_truth, options.iou_threshold));
    const auto& m = matches.back();
    report.n_true_positives += m.pairs.size();
    report.per_image.push_back({image.image_id, image.ground_truth.size(), image.predictions.size(), m.pairs.size(),
                                tp_gt_ratio(m, image.ground_truth.size()), mean_jaccard(std::span(&m, 1))});
  }
  if (report.n_gt == 0) throw InvalidInput("evaluate: dataset has no ground-truth boxes");
  report.tp_gt_ratio = static_cast<double>(report.n_true_positives) / static_cast<double>(report.n_gt);
  report.mean_jaccard = mean_jaccard(matches);
  report.pr_curve = reference::pr_curve(images, options.iou_threshold);

  if (options.ap_mode == ApMode::pooled) {
    report.average_precision = report.pr_curve.empty() ? 0.0 : average_precision(report.pr_curve);
  } else {
    double sum = 0.0;
    std::size_t counted = 0;
    for (const auto& image : images) {
      if (image.ground_truth.empty()) continue;
      const auto curve = reference::pr_curve(std::span(&image, 1), options.iou_threshold);
      sum += curve.empty() ? 0.0 : average_precision(curve);
      ++counted;
    }
    report.average_precision = sum / static_cast<double>(counted);
  }
  return report;
}

ImageRaster resize(const ImageRaster& image, double scale, Interpolation interpolation) {
  if (scale == 1.0) return image;
  const auto out_w = static_cast<std::size_t>(std::llround(scale * static_cast<double>(image.width())));
  const auto out_h = static_cast<std::size_t>(std::llround(scale * static_cast<double>(image.height())));
  if (out_w == 0 || out_h == 0) throw InvalidInput("resize: degenerate output");
  ImageRaster out(out_w, out_h);
  const double max_x = static_cast<double>(image.width() - 1);
  const double max_y = static_cast<double>(image.height() - 1);
  for (std::size_t y = 0; y < out_h; ++y) {
    for (std::size_t x = 0; x < out_w; ++x) {
      const double u = (static_cast<double>(x) + 0.5) / scale - 0.5;
      const double v = (static_cast<double>(y) + 0.5) / scale - 0.5;
      for (std::size_t c = 0; c < ImageRaster::kChannels; ++c) {
        if (interpolation == Interpolation::nearest) {
          const auto sx = static_cast<std::size_t>(std::clamp(std::ceil(u - 0.5), 0.0, max_x));
          const auto sy = static_cast<std::size_t>(std::clamp(std::ceil(v - 0.5), 0.0, max_y));
          out.at(x, y, c) = image.at(sx, sy, c);
          continue;
        }
        const double cu = std::clamp(u, 0.0, max_x);
        const double cv = std::clamp(v, 0.0, max_y);
        const auto x0 = static_cast<std::size_t>(std::floor(cu));
        const auto y0 = static_cast<std::size_t>(std::floor(cv));
        const std::size_t x1 = std::min(x0 + 1, image.width() - 1);
        const std::size_t y1 = std::min(y0 + 1, image.height() - 1);
        const double fx = cu - static_cast<double>(x0);
        const double fy = cv - static_cast<double>(y0);
        const double top = (1.0 - fx) * image.at(x0, y0, c) + fx * image.at(x1, y0, c);
        const double bottom = (1.0 - fx) * image.at(x0, y1, c) + fx * image.at(x1, y1, c);
        const double value = (1.0 - fy) * top + fy * bottom;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
      }
    }
  }
  return out;
}

std::vector<LinearSVM> train_face_models(std::span<const FaceInstance> faces,
                                         std::span<const FaceInstance> fallback,
                                         const FallbackFilter& excluded,
                                         const FaceModelConfig& config, PositiveSource& source) {
  std::vector<LinearSVM> models;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const auto positives = source.positives(faces[i], face_seed(config.seed, faces[i]));
    const auto negatives = detail::negatives_for(faces, i, fallback, excluded, config);
    SvmHyperparameters hp = config.svm;
    hp.seed = face_seed(config.seed ^ config.svm.seed, faces[i]);
    models.push_back(train_svm(positives, negatives, hp));
  }
  return models;
}

}  // namespace crowdcount::reference
