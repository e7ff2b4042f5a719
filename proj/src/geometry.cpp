#include "crowdcount/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "crowdcount/error.hpp"

namespace crowdcount {

bool Box2D::valid() const noexcept {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) && w > 0.0 &&
         h > 0.0;
}

bool ScoredBox::valid() const noexcept { return box.valid() && std::isfinite(score); }

void require_valid(const Box2D& b) {
  if (!b.valid()) {
    throw InvalidInput("invalid box (" + std::to_string(b.x) + ", " + std::to_string(b.y) + ", " +
                       std::to_string(b.w) + ", " + std::to_string(b.h) + ")");
  }
}

void require_valid(const ScoredBox& b) {
  require_valid(b.box);
  if (!std::isfinite(b.score)) throw InvalidInput("non-finite detection score");
}

double intersection_area(const Box2D& a, const Box2D& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

double iou(const Box2D& a, const Box2D& b) {
  require_valid(a);
  require_valid(b);
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<ScoredBox> nms(std::span<const ScoredBox> boxes, double overlap_threshold) {
  for (const auto& b : boxes) require_valid(b);

  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return boxes[i].score > boxes[j].score; });

  std::vector<ScoredBox> kept;
  std::vector<bool> suppressed(boxes.size(), false);
  for (std::size_t a = 0; a < order.size(); ++a) {
    if (suppressed[a]) continue;
    const ScoredBox& best = boxes[order[a]];
    kept.push_back(best);
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      if (!suppressed[b] && iou(best.box, boxes[order[b]].box) > overlap_threshold) {
        suppressed[b] = true;
      }
    }
  }
  return kept;
}

Box2D rescale_box(const Box2D& b, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw InvalidInput("rescale_box: scale must be positive, got " + std::to_string(scale));
  }
  return {b.x / scale, b.y / scale, b.w / scale, b.h / scale};
}

Box2D clamp_box(const Box2D& b, double width, double height) {
  // (x + w) - x need not give back w, so boxes already inside stay untouched
  if (b.x >= 0.0 && b.y >= 0.0 && b.right() <= width && b.bottom() <= height) return b;
  const double x0 = std::clamp(b.x, 0.0, width);
  const double y0 = std::clamp(b.y, 0.0, height);
  const double x1 = std::clamp(b.right(), 0.0, width);
  const double y1 = std::clamp(b.bottom(), 0.0, height);
  return {x0, y0, std::max(0.0, x1 - x0), std::max(0.0, y1 - y0)};
}

std::vector<double> iou_matrix(std::span<const Box2D> a, std::span<const Box2D> b) {
  for (const auto& box : a) require_valid(box);
  for (const auto& box : b) require_valid(box);
  std::vector<double> out(a.size() * b.size());
  const auto rows = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double inter = intersection_area(a[i], b[j]);
      out[static_cast<std::size_t>(i) * b.size() + j] =
          std::clamp(inter / (a[i].area() + b[j].area() - inter), 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace crowdcount
