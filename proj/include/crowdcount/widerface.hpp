#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "crowdcount/geometry.hpp"

namespace crowdcount {

enum class Blur { none = 0, normal = 1, heavy = 2 };

// One ground-truth face with its WIDERFACE attribute flags.
struct Annotation {
  std::string image_id;
  Box2D box;
  Blur blur = Blur::none;
  int expression = 0;
  int illumination = 0;
  int invalid = 0;
  int occlusion = 0;
  int pose = 0;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct AnnotatedImage {
  std::string image_id;
  std::vector<Annotation> faces;
  std::size_t dropped = 0;  // zero-size boxes removed while parsing
};

struct WiderfaceSet {
  std::vector<AnnotatedImage> images;
  std::size_t dropped = 0;
};

// Parses the published ground-truth layout: a path line, a face-count line,
// then one "x y w h blur expression illumination invalid occlusion pose" line
// per face. A zero count may be followed by a single placeholder line of ten
// zeros. Throws ParseError carrying the line number.
WiderfaceSet parse_widerface(std::istream& in);
WiderfaceSet parse_widerface_file(const std::string& path);

// Canonical form: single-space separated integers, zero-count images carry the
// placeholder line. Parsing then writing a canonical file reproduces it.
void write_widerface(std::ostream& out, const WiderfaceSet& set);

std::vector<Box2D> boxes_of(const AnnotatedImage& image);

}  // namespace crowdcount
