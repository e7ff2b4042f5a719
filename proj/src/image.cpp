#include "crowdcount/image.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "crowdcount/error.hpp"

namespace crowdcount {

ImageRaster::ImageRaster(std::size_t width, std::size_t height, std::uint8_t fill)
    : width_(width), height_(height), data_(width * height * kChannels, fill) {
  if (width == 0 || height == 0) throw InvalidInput("image dimensions must be at least 1x1");
}

ImageRaster::ImageRaster(std::size_t width, std::size_t height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width == 0 || height == 0) throw InvalidInput("image dimensions must be at least 1x1");
  if (data_.size() != width * height * kChannels) {
    throw InvalidInput("image data length " + std::to_string(data_.size()) + " does not match " +
                       std::to_string(width) + "x" + std::to_string(height) + "x3");
  }
}

namespace {

// Next header token of a PPM file, skipping whitespace and '#' comments.
std::string ppm_token(std::istream& in) {
  std::string token;
  for (int c = in.get(); c != EOF; c = in.get()) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  return token;
}

std::size_t ppm_number(std::istream& in, const char* field) {
  const std::string token = ppm_token(in);
  if (token.empty() || !std::all_of(token.begin(), token.end(), ::isdigit)) {
    throw InvalidInput(std::string("PPM: bad ") + field + " '" + token + "'");
  }
  return std::stoul(token);
}

// Nearest source index for output index i: the source pixel center closest
// to the mapped center, halves resolved toward the lower index.
std::size_t nearest_index(std::size_t i, double scale, std::size_t extent) {
  const double u = (static_cast<double>(i) + 0.5) / scale - 0.5;
  const double src = std::ceil(u - 0.5);
  return static_cast<std::size_t>(std::clamp(src, 0.0, static_cast<double>(extent - 1)));
}

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

Tap bilinear_tap(std::size_t i, double scale, std::size_t extent) {
  double u = (static_cast<double>(i) + 0.5) / scale - 0.5;
  u = std::clamp(u, 0.0, static_cast<double>(extent - 1));
  const auto lo = static_cast<std::size_t>(std::floor(u));
  return {lo, std::min(lo + 1, extent - 1), u - static_cast<double>(lo)};
}

}  // namespace

ImageRaster read_ppm(std::istream& in) {
  if (ppm_token(in) != "P6") throw InvalidInput("PPM: only binary P6 files are supported");
  const std::size_t width = ppm_number(in, "width");
  const std::size_t height = ppm_number(in, "height");
  const std::size_t maxval = ppm_number(in, "maxval");
  if (maxval != 255) throw InvalidInput("PPM: only maxval 255 is supported");
  // ppm_token consumed exactly one whitespace byte after maxval.
  std::vector<std::uint8_t> data(width * height * ImageRaster::kChannels);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (static_cast<std::size_t>(in.gcount()) != data.size()) {
    throw InvalidInput("PPM: truncated pixel data");
  }
  return ImageRaster(width, height, std::move(data));
}

ImageRaster read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open image " + path.string());
  return read_ppm(in);
}

void write_ppm(std::ostream& out, const ImageRaster& image) {
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data().data()),
            static_cast<std::streamsize>(image.data().size()));
}

void write_ppm(const std::filesystem::path& path, const ImageRaster& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write image " + path.string());
  write_ppm(out, image);
}

ImageRaster resize(const ImageRaster& image, double scale, Interpolation interpolation) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidInput("resize: scale must be positive");
  if (image.empty()) throw InvalidInput("resize: empty image");
  if (scale == 1.0) return image;

  const auto out_w = static_cast<std::size_t>(std::llround(scale * static_cast<double>(image.width())));
  const auto out_h = static_cast<std::size_t>(std::llround(scale * static_cast<double>(image.height())));
  if (out_w == 0 || out_h == 0) {
    throw InvalidInput("resize: scale " + std::to_string(scale) + " collapses " +
                       std::to_string(image.width()) + "x" + std::to_string(image.height()));
  }

  ImageRaster out(out_w, out_h);
  const auto rows = static_cast<std::ptrdiff_t>(out_h);
  if (interpolation == Interpolation::nearest) {
    std::vector<std::size_t> xs(out_w);
    for (std::size_t x = 0; x < out_w; ++x) xs[x] = nearest_index(x, scale, image.width());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t y = 0; y < rows; ++y) {
      const std::size_t sy = nearest_index(static_cast<std::size_t>(y), scale, image.height());
      for (std::size_t x = 0; x < out_w; ++x) {
        for (std::size_t c = 0; c < ImageRaster::kChannels; ++c) {
          out.at(x, static_cast<std::size_t>(y), c) = image.at(xs[x], sy, c);
        }
      }
    }
    return out;
  }

  std::vector<Tap> xs(out_w);
  for (std::size_t x = 0; x < out_w; ++x) xs[x] = bilinear_tap(x, scale, image.width());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t y = 0; y < rows; ++y) {
    const Tap ty = bilinear_tap(static_cast<std::size_t>(y), scale, image.height());
    for (std::size_t x = 0; x < out_w; ++x) {
      const Tap& tx = xs[x];
      for (std::size_t c = 0; c < ImageRaster::kChannels; ++c) {
        const double top = (1.0 - tx.frac) * image.at(tx.lo, ty.lo, c) + tx.frac * image.at(tx.hi, ty.lo, c);
        const double bottom = (1.0 - tx.frac) * image.at(tx.lo, ty.hi, c) + tx.frac * image.at(tx.hi, ty.hi, c);
        const double v = (1.0 - ty.frac) * top + ty.frac * bottom;
        out.at(x, static_cast<std::size_t>(y), c) =
            static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

ImageRaster crop(const ImageRaster& image, const Box2D& box) {
  const Box2D clamped =
      clamp_box(box, static_cast<double>(image.width()), static_cast<double>(image.height()));
  const auto x0 = static_cast<std::size_t>(std::floor(clamped.x));
  const auto y0 = static_cast<std::size_t>(std::floor(clamped.y));
  const auto x1 = static_cast<std::size_t>(std::ceil(clamped.right()));
  const auto y1 = static_cast<std::size_t>(std::ceil(clamped.bottom()));
  if (!clamped.valid() || x1 <= x0 || y1 <= y0) {
    throw InvalidInput("crop: box lies outside the image");
  }
  ImageRaster out(x1 - x0, y1 - y0);
  for (std::size_t y = y0; y < y1; ++y) {
    for (std::size_t x = x0; x < x1; ++x) {
      for (std::size_t c = 0; c < ImageRaster::kChannels; ++c) out.at(x - x0, y - y0, c) = image.at(x, y, c);
    }
  }
  return out;
}

}  // namespace crowdcount
