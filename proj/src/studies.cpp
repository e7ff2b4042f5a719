#include "crowdcount/studies.hpp"

#include <algorithm>
#include <set>

#include "crowdcount/error.hpp"

namespace crowdcount {

std::vector<ImageEval> join_detections(const WiderfaceSet& annotations, const DetectionMap& detections,
                                       std::vector<std::string>& warnings,
                                       const AnnotationFilter& face_filter,
                                       const std::function<bool(const std::string&)>& image_filter) {
  std::vector<ImageEval> out;
  std::set<std::string> annotated;
  for (const auto& image : annotations.images) {
    annotated.insert(image.image_id);
    if (image_filter && !image_filter(image.image_id)) continue;
    ImageEval e;
    e.image_id = image.image_id;
    for (const auto& face : image.faces) {
      if (!face_filter || face_filter(face)) e.ground_truth.push_back(face.box);
    }
    if (const auto it = detections.find(image.image_id); it != detections.end()) {
      e.predictions = it->second;
    } else {
      warnings.push_back("no detections for annotated image " + image.image_id);
    }
    out.push_back(std::move(e));
  }
  for (const auto& [id, boxes] : detections) {
    if (!annotated.count(id) && (!image_filter || image_filter(id))) {
      warnings.push_back("detections for unannotated image " + id + " ignored");
    }
  }
  return out;
}

std::size_t overlap_count(const WiderfaceSet& annotations, const DetectionMap& detections) {
  return static_cast<std::size_t>(std::count_if(annotations.images.begin(), annotations.images.end(),
                                                [&](const auto& im) { return detections.count(im.image_id) > 0; }));
}

namespace {

ResolutionRow row_from(double scale, std::span<const ImageEval> images, double iou_threshold) {
  EvalOptions options;
  options.iou_threshold = iou_threshold;
  const EvalReport report = evaluate(images, options);
  return {scale, report.tp_gt_ratio, report.mean_jaccard, report.n_predictions, report.n_gt};
}

void require_scales(std::size_t n) {
  if (n == 0) throw InvalidInput("resolution study: empty scale list");
}

void require_scale(double s) {
  if (!(s > 0.0)) throw InvalidInput("resolution study: scales must be positive");
}

}  // namespace

std::vector<ResolutionRow> resolution_study(const WiderfaceSet& annotations, const ImageLoader& load,
                                            DetectorBackend& backend, std::span<const double> scales,
                                            const PyramidConfig& pyramid, double iou_threshold) {
  require_scales(scales.size());
  std::vector<ResolutionRow> rows;
  for (double s : scales) {
    require_scale(s);
    std::vector<ImageEval> images;
    for (const auto& annotated : annotations.images) {
      const ImageRaster original = load(annotated.image_id);
      const ImageRaster small = resize(original, s, pyramid.interpolation);
      ImageEval e;
      e.image_id = annotated.image_id;
      e.predictions = detect_multiscale(small, backend, pyramid);
      for (const auto& face : annotated.faces) e.ground_truth.push_back(rescale_box(face.box, 1.0 / s));
      images.push_back(std::move(e));
    }
    rows.push_back(row_from(s, images, iou_threshold));
  }
  return rows;
}

std::vector<ResolutionRow> resolution_study_stored(
    const WiderfaceSet& annotations, std::span<const std::pair<double, DetectionMap>> per_scale,
    double iou_threshold) {
  require_scales(per_scale.size());
  std::vector<ResolutionRow> rows;
  for (const auto& [s, detections] : per_scale) {
    require_scale(s);
    std::vector<std::string> ignored;
    auto images = join_detections(annotations, detections, ignored);
    for (auto& e : images) {
      for (auto& g : e.ground_truth) g = rescale_box(g, 1.0 / s);
    }
    rows.push_back(row_from(s, images, iou_threshold));
  }
  return rows;
}

BlurStudy blur_study(const WiderfaceSet& annotations, const DetectionMap& detections,
                     const EvalOptions& options) {
  BlurStudy study;
  std::vector<std::string> warnings;
  const auto all = join_detections(annotations, detections, warnings);
  study.all_faces = evaluate(all, options);
  study.all_faces.warnings = warnings;

  std::vector<std::string> heavy_warnings;
  const auto heavy = join_detections(annotations, detections, heavy_warnings,
                                     [](const Annotation& a) { return a.blur == Blur::heavy; });
  std::size_t n_heavy = 0;
  for (const auto& e : heavy) n_heavy += e.ground_truth.size();
  if (n_heavy == 0) {
    study.heavy_blur_empty = true;
    study.heavy_blur.ap_mode = options.ap_mode;
    study.heavy_blur.warnings.push_back("no heavy-blur faces in the annotations");
  } else {
    study.heavy_blur = evaluate(heavy, options);
    study.heavy_blur.warnings = heavy_warnings;
  }
  return study;
}

std::string widerface_category(const std::string& image_id) {
  if (const auto slash = image_id.find('/'); slash != std::string::npos) {
    const std::string dir = image_id.substr(0, slash);
    const auto dashes = dir.find("--");
    return dashes == std::string::npos ? dir : dir.substr(dashes + 2);
  }
  // Bare file names look like "0_Parade_marchingband_1_849.jpg".
  const auto first = image_id.find('_');
  if (first == std::string::npos) return {};
  const auto second = image_id.find('_', first + 1);
  return image_id.substr(first + 1, second == std::string::npos ? std::string::npos : second - first - 1);
}

std::vector<BenchmarkRow> benchmark_table(const WiderfaceSet& annotations, std::span<const BenchmarkRun> runs,
                                          double iou_threshold, std::vector<std::string>& warnings) {
  std::vector<std::string> algorithms, categories;
  auto remember = [](std::vector<std::string>& list, const std::string& v) {
    if (std::find(list.begin(), list.end(), v) == list.end()) list.push_back(v);
  };
  for (const auto& r : runs) {
    remember(algorithms, r.algorithm);
    remember(categories, r.category);
  }

  EvalOptions options;
  options.iou_threshold = iou_threshold;
  std::vector<BenchmarkRow> rows;
  for (const auto& algorithm : algorithms) {
    for (const auto& category : categories) {
      const auto run = std::find_if(runs.begin(), runs.end(), [&](const BenchmarkRun& r) {
        return r.algorithm == algorithm && r.category == category;
      });
      if (run == runs.end()) {
        warnings.push_back("no detections for " + algorithm + " on category " + category + "; row omitted");
        continue;
      }
      std::vector<std::string> join_warnings;
      const auto images = join_detections(annotations, run->detections, join_warnings, {},
                                          [&](const std::string& id) { return widerface_category(id) == category; });
      std::size_t n_gt = 0;
      for (const auto& e : images) n_gt += e.ground_truth.size();
      if (n_gt == 0) {
        warnings.push_back("category " + category + " has no ground truth; row for " + algorithm + " omitted");
        continue;
      }
      rows.push_back({algorithm, category, evaluate(images, options).tp_gt_ratio, run->wall_time_s});
    }
  }
  return rows;
}

}  // namespace crowdcount
