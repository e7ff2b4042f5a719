#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "crowdcount/geometry.hpp"

namespace crowdcount {

// 8-bit RGB raster, row-major, channels interleaved.
class ImageRaster {
public:
  static constexpr std::size_t kChannels = 3;

  ImageRaster() = default;
  // Filled with `fill` on every channel.
  ImageRaster(std::size_t width, std::size_t height, std::uint8_t fill = 0);
  ImageRaster(std::size_t width, std::size_t height, std::vector<std::uint8_t> data);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c) const noexcept {
    return data_[(y * width_ + x) * kChannels + c];
  }
  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c) noexcept {
    return data_[(y * width_ + x) * kChannels + c];
  }

  friend bool operator==(const ImageRaster&, const ImageRaster&) = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> data_;
};

enum class Interpolation { nearest, bilinear };

// Binary PPM (P6, maxval 255).
ImageRaster read_ppm(std::istream& in);
ImageRaster read_ppm(const std::filesystem::path& path);
void write_ppm(std::ostream& out, const ImageRaster& image);
void write_ppm(const std::filesystem::path& path, const ImageRaster& image);

// Output size is round(scale * input) per axis; throws InvalidInput when that
// collapses to zero. Source coordinates are pixel-center aligned:
// u = (i + 0.5) / scale - 0.5. Nearest picks the closest source center with
// halves going to the lower index; bilinear clamps at the borders.
ImageRaster resize(const ImageRaster& image, double scale, Interpolation interpolation);

// Pixels of `box` after clamping to the image. Throws InvalidInput when the
// clamped region has no whole pixel.
ImageRaster crop(const ImageRaster& image, const Box2D& box);

}  // namespace crowdcount
