#pragma once

// Serial, deliberately plain versions of the parallel kernels. They exist so
// tests can check the fast paths against them.

#include <span>
#include <vector>

#include "crowdcount/geometry.hpp"
#include "crowdcount/image.hpp"
#include "crowdcount/matchkit.hpp"
#include "crowdcount/metrics.hpp"

namespace crowdcount::reference {

// Selection-based NMS: repeatedly scans the survivors for the best box.
std::vector<ScoredBox> nms(std::span<const ScoredBox> boxes, double overlap_threshold);

std::vector<double> iou_matrix(std::span<const Box2D> a, std::span<const Box2D> b);

// Re-runs the matcher from scratch at every distinct score threshold.
std::vector<PRPoint> pr_curve(std::span<const ImageEval> images, double iou_threshold);

EvalReport evaluate(std::span<const ImageEval> images, const EvalOptions& options);

ImageRaster resize(const ImageRaster& image, double scale, Interpolation interpolation);

std::vector<LinearSVM> train_face_models(std::span<const FaceInstance> faces,
                                         std::span<const FaceInstance> fallback,
                                         const FallbackFilter& excluded,
                                         const FaceModelConfig& config, PositiveSource& source);

}  // namespace crowdcount::reference
