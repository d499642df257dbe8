#pragma once

// Multinomial naive Bayes over non-negative feature values, Laplace smoothed.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"

namespace postimpact {

struct NaiveBayesModel {
  std::size_t dim = 0;
  double alpha = 1.0;
  std::array<double, 2> log_prior{};                    // [low, high]
  std::array<std::vector<double>, 2> log_likelihood;    // log theta per class and dimension

  /// Posterior [P(low|x), P(high|x)].
  std::array<double, 2> posterior(const FeatureVector& x) const {
    check_dim(dim, x);
    std::array<double, 2> joint = log_prior;
    for (const auto& e : x.entries)
      for (std::size_t c = 0; c < 2; ++c) joint[c] += e.value * log_likelihood[c][e.index];
    const double m = std::max(joint[0], joint[1]);
    const double z = m + std::log(std::exp(joint[0] - m) + std::exp(joint[1] - m));
    return {std::exp(joint[0] - z), std::exp(joint[1] - z)};
  }

  Prediction predict(const FeatureVector& x) const { return make_prediction(posterior(x)[1]); }

  friend bool operator==(const NaiveBayesModel&, const NaiveBayesModel&) = default;
};

inline NaiveBayesModel train_naive_bayes(std::span<const FeatureVector> xs, std::span<const Impact> ys,
                                         const TrainOptions& opt = {}) {
  const std::size_t dim = validate_training(xs, ys);
  const auto w = sample_weights(ys, opt.balanced_class_weights);
  std::array<std::vector<double>, 2> mass{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  std::array<double, 2> class_weight{};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto c = static_cast<std::size_t>(ys[i]);
    class_weight[c] += w[i];
    for (const auto& e : xs[i].entries) {
      if (e.value < 0.0) throw Error("naive Bayes requires non-negative features");
      mass[c][e.index] += w[i] * e.value;
    }
  }
  NaiveBayesModel m;
  m.dim = dim;
  m.alpha = opt.nb_alpha;
  const double total = class_weight[0] + class_weight[1];
  for (std::size_t c = 0; c < 2; ++c) {
    m.log_prior[c] = std::log(class_weight[c] / total);
    double sum = 0.0;
    for (double v : mass[c]) sum += v;
    const double denom = sum + opt.nb_alpha * static_cast<double>(dim);
    m.log_likelihood[c].resize(dim);
    for (std::size_t d = 0; d < dim; ++d) m.log_likelihood[c][d] = std::log((mass[c][d] + opt.nb_alpha) / denom);
  }
  return m;
}

}  // namespace postimpact
