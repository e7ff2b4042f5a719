#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "crowdcount/geometry.hpp"
#include "crowdcount/image.hpp"

namespace crowdcount {

// Scales are 2^k for k in [k_min, k_max], skipping those whose scaled area
// exceeds max_pixels.
struct PyramidConfig {
  int k_min = -2;
  int k_max = 1;
  double max_pixels = 2.5e7;
  Interpolation interpolation = Interpolation::bilinear;
  double nms_threshold = 0.3;

  void validate() const;
};

struct BackendInfo {
  std::string name;
  std::string version;
};

// A face detector. Boxes are returned in the coordinate frame of the image it
// was given. Implementations must be deterministic for identical input, and
// a single instance serves one request at a time.
class DetectorBackend {
public:
  virtual ~DetectorBackend() = default;
  virtual BackendInfo info() const = 0;
  // `scale` is the pyramid scale the image was produced at (informational).
  virtual std::vector<ScoredBox> detect(const ImageRaster& image, double scale) = 0;
};

std::vector<double> build_scales(std::size_t width, std::size_t height, const PyramidConfig& config);

// Runs the backend on every pyramid level, maps detections back to the
// original frame, clamps them to the image and applies NMS. Any backend
// failure aborts the whole call with a BackendError naming the scale.
std::vector<ScoredBox> detect_multiscale(const ImageRaster& image, DetectorBackend& backend,
                                         const PyramidConfig& config);

}  // namespace crowdcount
