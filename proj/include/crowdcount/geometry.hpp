#pragma once

#include <span>
#include <vector>

namespace crowdcount {

// Axis-aligned rectangle in pixel units, (x, y) is the top-left corner.
// Area is w * h; there is no +1 pixel convention.
struct Box2D {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const noexcept { return w * h; }
  double center_x() const noexcept { return x + 0.5 * w; }
  double center_y() const noexcept { return y + 0.5 * h; }
  double right() const noexcept { return x + w; }
  double bottom() const noexcept { return y + h; }

  bool valid() const noexcept;

  friend bool operator==(const Box2D&, const Box2D&) = default;
};

struct ScoredBox {
  Box2D box;
  double score = 0.0;

  bool valid() const noexcept;

  friend bool operator==(const ScoredBox&, const ScoredBox&) = default;
};

// Throws InvalidInput unless w > 0, h > 0 and every field is finite.
void require_valid(const Box2D& b);
void require_valid(const ScoredBox& b);

double intersection_area(const Box2D& a, const Box2D& b);

// Jaccard similarity of the two boxes by area.
double iou(const Box2D& a, const Box2D& b);

// Greedy non-maximum suppression. Boxes are visited by descending score
// (equal scores keep input order); a box is discarded when its IoU with an
// already kept box exceeds overlap_threshold. Output is in visiting order.
std::vector<ScoredBox> nms(std::span<const ScoredBox> boxes, double overlap_threshold);

// Divides every coordinate by scale. Maps a detection found on an image
// resized by `scale` back into the original frame.
Box2D rescale_box(const Box2D& b, double scale);

// Intersection with [0, width) x [0, height). Returns a zero-size box when
// nothing is left; callers check valid().
Box2D clamp_box(const Box2D& b, double width, double height);

// Row-major |a| x |b| IoU matrix. Rows are filled in parallel.
std::vector<double> iou_matrix(std::span<const Box2D> a, std::span<const Box2D> b);

}  // namespace crowdcount
