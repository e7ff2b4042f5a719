#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "crowdcount/geometry.hpp"

namespace crowdcount {

inline constexpr std::size_t kEmbeddingDim = 128;

// Fixed-length face descriptor.
struct Embedding {
  std::array<double, kEmbeddingDim> values{};

  double& operator[](std::size_t i) noexcept { return values[i]; }
  double operator[](std::size_t i) const noexcept { return values[i]; }

  bool finite() const noexcept;
  double norm() const noexcept;
  // Unit-L2 copy. Throws InvalidInput for a zero or non-finite vector.
  Embedding normalized() const;

  friend bool operator==(const Embedding&, const Embedding&) = default;
};

double dot(const Embedding& a, const Embedding& b) noexcept;

// Builds an embedding from exactly kEmbeddingDim values.
Embedding make_embedding(std::span<const double> values);

// A detected face in one frame.
struct FaceInstance {
  std::size_t frame_index = 0;
  std::string face_id;
  Box2D box;  // original-frame coordinates
  Embedding embedding;
  std::optional<std::string> identity_label;
};

}  // namespace crowdcount
