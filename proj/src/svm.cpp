#include "crowdcount/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "crowdcount/error.hpp"
#include "random_util.hpp"

namespace crowdcount {
namespace {

void require_unit(std::span<const Embedding> samples, const char* what) {
  for (const auto& e : samples) {
    if (!e.finite() || std::abs(e.norm() - 1.0) > 1e-6) {
      throw InvalidInput(std::string("train_svm: ") + what + " must be L2-normalized");
    }
  }
}

}  // namespace

double hinge_objective(const Embedding& weights, double bias, std::span<const Embedding> positives,
                       std::span<const Embedding> negatives, double lambda) {
  const std::size_t n = positives.size() + negatives.size();
  if (n == 0) throw InvalidInput("hinge_objective: no samples");
  double loss = 0.0;
  for (const auto& x : positives) loss += std::max(0.0, 1.0 - (dot(weights, x) + bias));
  for (const auto& x : negatives) loss += std::max(0.0, 1.0 + (dot(weights, x) + bias));
  return 0.5 * lambda * dot(weights, weights) + loss / static_cast<double>(n);
}

HingeGradient hinge_subgradient(const Embedding& weights, double bias,
                                std::span<const Embedding> positives,
                                std::span<const Embedding> negatives, double lambda) {
  const std::size_t n = positives.size() + negatives.size();
  if (n == 0) throw InvalidInput("hinge_subgradient: no samples");
  HingeGradient g;
  for (std::size_t i = 0; i < kEmbeddingDim; ++i) g.weights[i] = lambda * weights[i];
  const double inv_n = 1.0 / static_cast<double>(n);
  auto accumulate = [&](const Embedding& x, double y) {
    if (y * (dot(weights, x) + bias) < 1.0) {
      for (std::size_t i = 0; i < kEmbeddingDim; ++i) g.weights[i] -= inv_n * y * x[i];
      g.bias -= inv_n * y;
    }
  };
  for (const auto& x : positives) accumulate(x, 1.0);
  for (const auto& x : negatives) accumulate(x, -1.0);
  return g;
}

LinearSVM train_svm(std::span<const Embedding> positives, std::span<const Embedding> negatives,
                    const SvmHyperparameters& hp) {
  if (positives.empty() || negatives.empty()) {
    throw InvalidInput("train_svm: need at least one positive and one negative");
  }
  if (!(hp.lambda > 0.0) || hp.epochs < 1) throw InvalidInput("train_svm: lambda > 0 and epochs >= 1 required");
  require_unit(positives, "positives");
  require_unit(negatives, "negatives");

  const std::size_t n = positives.size() + negatives.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto sample = [&](std::size_t k) -> const Embedding& {
    return k < positives.size() ? positives[k] : negatives[k - positives.size()];
  };

  const double radius = 1.0 / std::sqrt(hp.lambda);
  rng::Generator gen(hp.seed);

  LinearSVM best;
  best.hyperparameters = hp;
  double best_objective = hinge_objective(best.weights, best.bias, positives, negatives, hp.lambda);

  Embedding w;
  double b = 0.0;
  std::size_t step = 0;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    gen.shuffle(order);
    for (std::size_t k : order) {
      const Embedding& x = sample(k);
      const double y = k < positives.size() ? 1.0 : -1.0;
      const double rate = 1.0 / (hp.lambda * static_cast<double>(step + 1));
      const double margin = y * (dot(w, x) + b);
      const double shrink = 1.0 - rate * hp.lambda;
      for (std::size_t i = 0; i < kEmbeddingDim; ++i) w[i] *= shrink;
      if (margin < 1.0) {
        for (std::size_t i = 0; i < kEmbeddingDim; ++i) w[i] += rate * y * x[i];
        b += rate * y;
      }
      const double norm = w.norm();
      if (norm > radius) {
        for (std::size_t i = 0; i < kEmbeddingDim; ++i) w[i] *= radius / norm;
      }
      ++step;
    }
    const double objective = hinge_objective(w, b, positives, negatives, hp.lambda);
    if (objective < best_objective) {
      best_objective = objective;
      best.weights = w;
      best.bias = b;
    }
    best.objective_history.push_back(best_objective);
  }
  return best;
}

double svm_score(const LinearSVM& model, const Embedding& e) noexcept {
  return dot(model.weights, e) + model.bias;
}

}  // namespace crowdcount
