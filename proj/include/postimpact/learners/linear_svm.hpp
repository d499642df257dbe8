#pragma once

// Linear SVM trained with Pegasos (stochastic subgradient on the
// L2-regularized hinge loss). The bias is an extra, regularized weight on a
// constant feature.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "../rng.hpp"
#include "common.hpp"

namespace postimpact {

struct LinearSvmModel {
  std::vector<double> weights;  // one per feature dimension
  double bias = 0.0;
  double lambda = 1e-4;
  /// Regularized objective of the retained weights after each epoch.
  std::vector<double> objective_history;
  /// Objective of the running iterate after each epoch.
  std::vector<double> iterate_objective_history;

  std::size_t dim() const noexcept { return weights.size(); }

  double margin(const FeatureVector& x) const {
    check_dim(weights.size(), x);
    double s = bias;
    for (const auto& e : x.entries) s += weights[e.index] * e.value;
    return s;
  }

  /// Score is the logistic squash of the margin.
  Prediction predict(const FeatureVector& x) const {
    return make_prediction(1.0 / (1.0 + std::exp(-margin(x))));
  }

  friend bool operator==(const LinearSvmModel&, const LinearSvmModel&) = default;
};

/// lambda/2 * (|w|^2 + b^2) + mean weighted hinge loss.
inline double svm_objective(std::span<const double> w, double b, double lambda, std::span<const FeatureVector> xs,
                            std::span<const Impact> ys, std::span<const double> sample_w) {
  double norm2 = b * b;
  for (double v : w) norm2 += v * v;
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double m = b;
    for (const auto& e : xs[i].entries) m += w[e.index] * e.value;
    const double y = ys[i] == Impact::High ? 1.0 : -1.0;
    loss += sample_w[i] * std::max(0.0, 1.0 - y * m);
  }
  return 0.5 * lambda * norm2 + loss / static_cast<double>(xs.size());
}

inline LinearSvmModel train_linear_svm(std::span<const FeatureVector> xs, std::span<const Impact> ys,
                                       const TrainOptions& opt = {}) {
  const std::size_t dim = validate_training(xs, ys);
  const auto sw = sample_weights(ys, opt.balanced_class_weights);
  const double lambda = opt.svm_lambda;
  const double radius2 = 1.0 / lambda;

  // w = scale * v; the last slot of v is the bias weight.
  std::vector<double> v(dim + 1, 0.0);
  double scale = 1.0;
  double v_norm2 = 0.0;

  std::vector<double> x_norm2(xs.size(), 1.0);
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (const auto& e : xs[i].entries) x_norm2[i] += e.value * e.value;

  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(opt.seed, 0x5356u));

  LinearSvmModel best;
  best.lambda = lambda;
  double best_objective = std::numeric_limits<double>::infinity();
  std::vector<double> current(dim, 0.0);

  std::uint64_t t = 0;
  for (std::size_t epoch = 0; epoch < opt.svm_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (const std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double y = ys[i] == Impact::High ? 1.0 : -1.0;
      double dot = v[dim];
      for (const auto& e : xs[i].entries) dot += v[e.index] * e.value;
      const double m = scale * dot;

      const double shrink = 1.0 - eta * lambda;
      if (shrink <= 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        scale = 1.0;
        v_norm2 = 0.0;
        dot = 0.0;
      } else {
        scale *= shrink;
      }
      if (y * m < 1.0) {
        const double a = eta * y * sw[i] / scale;
        v_norm2 += 2.0 * a * dot + a * a * x_norm2[i];
        for (const auto& e : xs[i].entries) v[e.index] += a * e.value;
        v[dim] += a;
      }
      const double w_norm2 = scale * scale * v_norm2;
      if (w_norm2 > radius2) scale *= std::sqrt(radius2 / w_norm2);
      if (scale < 1e-100) {
        for (double& c : v) c *= scale;
        scale = 1.0;
      }
    }
    for (std::size_t d = 0; d < dim; ++d) current[d] = scale * v[d];
    const double b = scale * v[dim];
    const double obj = svm_objective(current, b, lambda, xs, ys, sw);
    best.iterate_objective_history.push_back(obj);
    if (obj <= best_objective) {
      best_objective = obj;
      best.weights = current;
      best.bias = b;
    }
    best.objective_history.push_back(best_objective);
  }
  if (best.weights.empty()) best.weights.assign(dim, 0.0);
  return best;
}

}  // namespace postimpact
