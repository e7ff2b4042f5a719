#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crowdcount/image.hpp"
#include "crowdcount/metrics.hpp"
#include "crowdcount/pyramid.hpp"
#include "crowdcount/records.hpp"
#include "crowdcount/widerface.hpp"

namespace crowdcount {

using AnnotationFilter = std::function<bool(const Annotation&)>;

// One ImageEval per annotated image accepted by `image_filter` (all when
// empty). Faces failing `face_filter` are removed from the ground truth.
// Detections of unknown images and annotated images lacking detections are
// reported in `warnings`.
std::vector<ImageEval> join_detections(const WiderfaceSet& annotations,
                                       const DetectionMap& detections,
                                       std::vector<std::string>& warnings,
                                       const AnnotationFilter& face_filter = {},
                                       const std::function<bool(const std::string&)>& image_filter = {});

// Number of annotated images that also appear in the detection map.
std::size_t overlap_count(const WiderfaceSet& annotations, const DetectionMap& detections);

struct ResolutionRow {
  double scale = 1.0;
  double tp_gt = 0.0;
  double mean_iou = 0.0;
  std::size_t n_detected = 0;
  std::size_t n_gt = 0;
};

using ImageLoader = std::function<ImageRaster(const std::string& image_id)>;

// Downscales every image, runs the pyramid detector on it and scores against
// the ground truth mapped into the same frame. Throws InvalidInput on an
// empty scale list.
std::vector<ResolutionRow> resolution_study(const WiderfaceSet& annotations, const ImageLoader& load,
                                            DetectorBackend& backend, std::span<const double> scales,
                                            const PyramidConfig& pyramid, double iou_threshold);

// Same table from stored detections, each set expressed in the frame of the
// downscaled images it was produced on.
std::vector<ResolutionRow> resolution_study_stored(
    const WiderfaceSet& annotations, std::span<const std::pair<double, DetectionMap>> per_scale,
    double iou_threshold);

struct BlurStudy {
  EvalReport all_faces;
  EvalReport heavy_blur;
  bool heavy_blur_empty = false;
};

// Evaluates the same predictions against all faces and against heavy-blur
// faces only.
BlurStudy blur_study(const WiderfaceSet& annotations, const DetectionMap& detections,
                     const EvalOptions& options);

// "0--Parade/0_Parade_x.jpg" -> "Parade".
std::string widerface_category(const std::string& image_id);

struct BenchmarkRun {
  std::string algorithm;
  std::string category;
  DetectionMap detections;
  std::optional<double> wall_time_s;
};

struct BenchmarkRow {
  std::string algorithm;
  std::string category;
  double tp_gt = 0.0;
  std::optional<double> wall_time_s;
};

// One row per (algorithm, category) run over the category's images. Missing
// combinations are omitted with a warning.
std::vector<BenchmarkRow> benchmark_table(const WiderfaceSet& annotations,
                                          std::span<const BenchmarkRun> runs,
                                          double iou_threshold, std::vector<std::string>& warnings);

}  // namespace crowdcount
