#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crowdcount/embedding.hpp"

namespace crowdcount {

struct SvmHyperparameters {
  double lambda = 0.01;  // L2 regularization strength
  int epochs = 200;
  std::uint64_t seed = 0;
};

// Linear classifier w.x + b trained on unit-norm embeddings.
struct LinearSVM {
  Embedding weights;
  double bias = 0.0;
  SvmHyperparameters hyperparameters;
  // Objective of the returned iterate after each epoch (non-increasing).
  std::vector<double> objective_history;
};

struct HingeGradient {
  Embedding weights;
  double bias = 0.0;
};

// (lambda / 2) |w|^2 + mean_i max(0, 1 - y_i (w.x_i + b)), positives y = +1.
double hinge_objective(const Embedding& weights, double bias, std::span<const Embedding> positives,
                       std::span<const Embedding> negatives, double lambda);

// Subgradient of hinge_objective; the hinge term contributes nothing at a kink.
HingeGradient hinge_subgradient(const Embedding& weights, double bias,
                                std::span<const Embedding> positives,
                                std::span<const Embedding> negatives, double lambda);

// Primal stochastic subgradient descent with step 1 / (lambda (t + 1)) and a
// projection onto |w| <= 1 / sqrt(lambda). Samples are reshuffled every epoch
// from the seed. Subgradient steps do not decrease the objective
// monotonically, so the best end-of-epoch iterate is kept and returned.
// Identical inputs and seed give bit-identical parameters.
LinearSVM train_svm(std::span<const Embedding> positives, std::span<const Embedding> negatives,
                    const SvmHyperparameters& hyperparameters = {});

double svm_score(const LinearSVM& model, const Embedding& e) noexcept;

}  // namespace crowdcount
