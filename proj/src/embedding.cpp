#include "crowdcount/embedding.hpp"

#include <cmath>

#include "crowdcount/error.hpp"

namespace crowdcount {

bool Embedding::finite() const noexcept {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Embedding::norm() const noexcept { return std::sqrt(dot(*this, *this)); }

Embedding Embedding::normalized() const {
  const double n = norm();
  if (!finite() || !(n > 0.0) || !std::isfinite(n)) {
    throw InvalidInput("cannot normalize a zero or non-finite embedding");
  }
  Embedding out;
  for (std::size_t i = 0; i < kEmbeddingDim; ++i) out[i] = values[i] / n;
  return out;
}

double dot(const Embedding& a, const Embedding& b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < kEmbeddingDim; ++i) s += a[i] * b[i];
  return s;
}

Embedding make_embedding(std::span<const double> values) {
  if (values.size() != kEmbeddingDim) {
    throw InvalidInput("embedding needs " + std::to_string(kEmbeddingDim) + " values, got " +
                       std::to_string(values.size()));
  }
  Embedding e;
  for (std::size_t i = 0; i < kEmbeddingDim; ++i) e[i] = values[i];
  return e;
}

}  // namespace crowdcount
