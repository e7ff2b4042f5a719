#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace oracle {

double raster_iou(const Box2D& a, const Box2D& b) {
  const long x0 = static_cast<long>(std::min(a.x, b.x));
  const long y0 = static_cast<long>(std::min(a.y, b.y));
  const long x1 = static_cast<long>(std::max(a.right(), b.right()));
  const long y1 = static_cast<long>(std::max(a.bottom(), b.bottom()));
  long in_a = 0, in_b = 0, both = 0;
  for (long y = y0; y < y1; ++y) {
    for (long x = x0; x < x1; ++x) {
      // Pixel [x, x+1) x [y, y+1) belongs to a box when its center does.
      const double cx = x + 0.5, cy = y + 0.5;
      const bool ia = cx > a.x && cx < a.right() && cy > a.y && cy < a.bottom();
      const bool ib = cx > b.x && cx < b.right() && cy > b.y && cy < b.bottom();
      in_a += ia;
      in_b += ib;
      both += ia && ib;
    }
  }
  return static_cast<double>(both) / static_cast<double>(in_a + in_b - both);
}

namespace {

double plain_iou(const Box2D& a, const Box2D& b) {
  const double w = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
  const double h = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
  return w * h / (a.w * a.h + b.w * b.h - w * h);
}

}  // namespace

std::vector<int> enumerate_greedy_assignment(std::span<const ScoredBox> predictions,
                                             std::span<const Box2D> ground_truth, double iou_threshold) {
  // Visiting order: descending score, stable.
  std::vector<std::size_t> order(predictions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return predictions[a].score > predictions[b].score; });

  using Key = std::vector<std::pair<double, int>>;
  Key best_key;
  bool have_best = false;
  std::vector<int> best, current(predictions.size(), -1);
  std::vector<bool> used(ground_truth.size(), false);

  std::function<void(std::size_t)> recurse = [&](std::size_t k) {
    if (k == order.size()) {
      Key key;
      for (std::size_t p : order) {
        const int g = current[p];
        key.emplace_back(g < 0 ? -1.0 : plain_iou(predictions[p].box, ground_truth[g]), g < 0 ? 0 : -g);
      }
      if (!have_best || key > best_key) {
        have_best = true;
        best_key = key;
        best = current;
      }
      return;
    }
    const std::size_t p = order[k];
    current[p] = -1;
    recurse(k + 1);
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (used[g] || !(plain_iou(predictions[p].box, ground_truth[g]) > iou_threshold)) continue;
      used[g] = true;
      current[p] = static_cast<int>(g);
      recurse(k + 1);
      used[g] = false;
      current[p] = -1;
    }
  };
  recurse(0);
  return best;
}

double envelope_integral(std::span<const PRPoint> curve) {
  std::vector<double> breaks{0.0};
  for (const auto& p : curve) breaks.push_back(p.recall);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double mid = 0.5 * (breaks[i] + breaks[i + 1]);
    double envelope = 0.0;
    for (const auto& p : curve) {
      if (p.recall >= mid) envelope = std::max(envelope, p.precision);
    }
    area += (breaks[i + 1] - breaks[i]) * envelope;
  }
  return area;
}

double grid_scan_f_half(std::span<const LabeledScore> labeled, std::size_t points) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& l : labeled) {
    lo = std::min(lo, l.score);
    hi = std::max(hi, l.score);
  }
  lo -= 1.0;
  hi += 1.0;
  double best = 0.0;
  for (std::size_t k = 0; k < points; ++k) {
    const double t = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    double tp = 0, fp = 0, pos = 0;
    for (const auto& l : labeled) {
      pos += l.is_match;
      if (l.score > t) (l.is_match ? tp : fp) += 1;
    }
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp / pos;
    const double f = p + r > 0 ? 1.25 * p * r / (0.25 * p + r) : 0.0;
    best = std::max(best, f);
  }
  return best;
}

double plain_dot(const Embedding& a, const Embedding& b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < crowdcount::kEmbeddingDim; ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

namespace {

double objective(const Embedding& w, double b, std::span<const Embedding> pos, std::span<const Embedding> neg,
                 double lambda) {
  double loss = 0.0;
  for (const auto& x : pos) loss += std::max(0.0, 1.0 - (plain_dot(w, x) + b));
  for (const auto& x : neg) loss += std::max(0.0, 1.0 + (plain_dot(w, x) + b));
  return 0.5 * lambda * plain_dot(w, w) + loss / static_cast<double>(pos.size() + neg.size());
}

}  // namespace

Gradient finite_difference_gradient(const Embedding& w, double b, std::span<const Embedding> positives,
                                    std::span<const Embedding> negatives, double lambda, double step) {
  Gradient g;
  for (std::size_t i = 0; i < crowdcount::kEmbeddingDim; ++i) {
    Embedding up = w, down = w;
    up[i] += step;
    down[i] -= step;
    g.weights[i] = (objective(up, b, positives, negatives, lambda) - objective(down, b, positives, negatives, lambda)) /
                   (2.0 * step);
  }
  g.bias = (objective(w, b + step, positives, negatives, lambda) - objective(w, b - step, positives, negatives, lambda)) /
           (2.0 * step);
  return g;
}

}  // namespace oracle
