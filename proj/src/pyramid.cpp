#include "crowdcount/pyramid.hpp"

#include <cmath>
#include <exception>
#include <string>

#include "crowdcount/error.hpp"
#include "text_util.hpp"

namespace crowdcount {

void PyramidConfig::validate() const {
  if (k_min > k_max) throw InvalidInput("pyramid: k_min must not exceed k_max");
  if (!(max_pixels >= 1.0)) throw InvalidInput("pyramid: max_pixels must be at least 1");
  if (!(nms_threshold >= 0.0 && nms_threshold <= 1.0)) {
    throw InvalidInput("pyramid: nms_threshold must lie in [0, 1]");
  }
}

std::vector<double> build_scales(std::size_t width, std::size_t height, const PyramidConfig& config) {
  config.validate();
  std::vector<double> scales;
  for (int k = config.k_min; k <= config.k_max; ++k) {
    const double s = std::ldexp(1.0, k);
    const double area = (s * static_cast<double>(width)) * (s * static_cast<double>(height));
    if (area <= config.max_pixels) scales.push_back(s);
  }
  if (scales.empty()) {
    throw InvalidInput("pyramid: no scale 2^k, k in [" + std::to_string(config.k_min) + ", " +
                       std::to_string(config.k_max) + "] fits max_pixels for a " +
                       std::to_string(width) + "x" + std::to_string(height) + " image");
  }
  return scales;
}

std::vector<ScoredBox> detect_multiscale(const ImageRaster& image, DetectorBackend& backend,
                                         const PyramidConfig& config) {
  const auto scales = build_scales(image.width(), image.height(), config);
  const auto width = static_cast<double>(image.width());
  const auto height = static_cast<double>(image.height());

  std::vector<ScoredBox> merged;
  for (double scale : scales) {
    std::vector<ScoredBox> found;
    try {
      const ImageRaster level = resize(image, scale, config.interpolation);
      found = backend.detect(level, scale);
    } catch (const std::exception& e) {
      const auto info = backend.info();
      throw BackendError("backend '" + info.name + "' (" + info.version + ") failed at scale " +
                         text::shortest(scale) + ": " + e.what());
    }
    for (const auto& d : found) {
      if (!d.valid()) {
        throw BackendError("backend '" + backend.info().name + "' returned an invalid box at scale " +
                           text::shortest(scale));
      }
      const Box2D mapped = clamp_box(rescale_box(d.box, scale), width, height);
      if (mapped.valid()) merged.push_back({mapped, d.score});
    }
  }
  return nms(merged, config.nms_threshold);
}

}  // namespace crowdcount
