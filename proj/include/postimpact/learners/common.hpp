#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "../corpus.hpp"
#include "../errors.hpp"
#include "../features.hpp"

namespace postimpact {

struct Prediction {
  Impact label = Impact::Low;
  double score = 0.0;  // confidence for High

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// High iff score >= 0.5.
inline Prediction make_prediction(double score) {
  return {score >= 0.5 ? Impact::High : Impact::Low, score};
}

/// Hyperparameters for all four learners. Defaults are the reproduction settings.
struct TrainOptions {
  std::uint64_t seed = 0;
  bool balanced_class_weights = false;

  double nb_alpha = 1.0;

  double svm_lambda = 1e-4;
  std::size_t svm_epochs = 50;

  std::size_t dt_max_depth = 20;
  std::size_t dt_min_samples_split = 2;

  std::size_t knn_k = 5;
};

/// Checks the shared training preconditions and returns the common dimension.
inline std::size_t validate_training(std::span<const FeatureVector> xs, std::span<const Impact> ys) {
  if (xs.size() != ys.size()) throw Error("vector/label count mismatch");
  if (xs.size() < 2) throw SingleClassTraining();
  const std::size_t dim = xs.front().dim;
  bool high = false, low = false;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].dim != dim) throw DimensionMismatch(dim, xs[i].dim);
    (ys[i] == Impact::High ? high : low) = true;
  }
  if (!high || !low) throw SingleClassTraining();
  return dim;
}

/// Per-example weights: all 1, or N / (2 * N_class) when balancing.
inline std::vector<double> sample_weights(std::span<const Impact> ys, bool balanced) {
  std::vector<double> w(ys.size(), 1.0);
  if (!balanced) return w;
  std::size_t n_high = 0;
  for (Impact y : ys) n_high += y == Impact::High;
  const std::size_t n_low = ys.size() - n_high;
  const double n = static_cast<double>(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i)
    w[i] = n / (2.0 * static_cast<double>(ys[i] == Impact::High ? n_high : n_low));
  return w;
}

inline void check_dim(std::size_t expected, const FeatureVector& x) {
  if (x.dim != expected) throw DimensionMismatch(expected, x.dim);
}

}  // namespace postimpact
