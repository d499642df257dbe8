#pragma once

// k-nearest neighbours by cosine similarity over sparse vectors.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "common.hpp"

namespace postimpact {

struct Neighbor {
  std::size_t index;
  double similarity;
};

class KnnModel {
 public:
  static constexpr double kTieTolerance = 1e-12;

  KnnModel() = default;

  KnnModel(std::size_t dim, std::size_t k, std::vector<FeatureVector> examples, std::vector<Impact> labels,
           std::vector<double> weights)
      : dim_(dim), k_(k), examples_(std::move(examples)), labels_(std::move(labels)), weights_(std::move(weights)) {
    build_index();
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t k() const noexcept { return k_; }
  const std::vector<FeatureVector>& examples() const noexcept { return examples_; }
  const std::vector<Impact>& labels() const noexcept { return labels_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// The min(k, N) most similar training examples, most similar first;
  /// equal similarities go to the lower training index. Similarities within
  /// kTieTolerance count as equal, so parallel vectors tie despite rounding.
  /// Zero vectors have similarity 0 to everything.
  std::vector<Neighbor> neighbors(const FeatureVector& x) const {
    check_dim(dim_, x);
    std::vector<double> sims(examples_.size(), 0.0);
    double qn = 0.0;
    for (const auto& e : x.entries) qn += e.value * e.value;
    if (qn > 0.0) {
      const double inv = 1.0 / std::sqrt(qn);
      for (const auto& e : x.entries) {
        const double q = e.value * inv;
        for (const auto& [row, value] : postings_[e.index]) sims[row] += q * value;
      }
    }
    const std::size_t take = std::min(k_, examples_.size());
    if (take == 0) return {};

    // Candidates: everything that could tie with the k-th best.
    std::vector<double> sorted_sims = sims;
    std::nth_element(sorted_sims.begin(), sorted_sims.begin() + static_cast<std::ptrdiff_t>(take - 1), sorted_sims.end(),
                     std::greater<>());
    const double floor = sorted_sims[take - 1] - 2 * kTieTolerance;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < sims.size(); ++i)
      if (sims[i] >= floor) idx.push_back(i);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return sims[a] != sims[b] ? sims[a] > sims[b] : a < b; });

    // Runs of near-equal similarities become one group, ordered by index.
    std::vector<std::size_t> group(idx.size(), 0);
    double head = idx.empty() ? 0.0 : sims[idx[0]];
    for (std::size_t i = 1; i < idx.size(); ++i) {
      const bool same = head - sims[idx[i]] <= kTieTolerance;
      if (!same) head = sims[idx[i]];
      group[i] = group[i - 1] + (same ? 0 : 1);
    }
    std::vector<std::size_t> order(idx.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return group[a] != group[b] ? group[a] < group[b] : idx[a] < idx[b]; });
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = idx[order[i]];
    idx = std::move(order);

    std::vector<Neighbor> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back({idx[i], sims[idx[i]]});
    return out;
  }

  /// Score is the (weighted) share of High among the neighbours.
  Prediction predict(const FeatureVector& x) const {
    const auto nn = neighbors(x);
    double high = 0.0, total = 0.0;
    for (const auto& n : nn) {
      total += weights_[n.index];
      if (labels_[n.index] == Impact::High) high += weights_[n.index];
    }
    return make_prediction(total > 0.0 ? high / total : 0.0);
  }

  friend bool operator==(const KnnModel& a, const KnnModel& b) {
    return a.dim_ == b.dim_ && a.k_ == b.k_ && a.examples_ == b.examples_ && a.labels_ == b.labels_ &&
           a.weights_ == b.weights_;
  }

 private:
  void build_index() {
    postings_.assign(dim_, {});
    for (std::size_t row = 0; row < examples_.size(); ++row) {
      double n = 0.0;
      for (const auto& e : examples_[row].entries) n += e.value * e.value;
      if (n == 0.0) continue;
      const double inv = 1.0 / std::sqrt(n);
      for (const auto& e : examples_[row].entries) postings_[e.index].push_back({row, e.value * inv});
    }
  }

  struct Posting {
    std::size_t row;
    double value;
  };

  std::size_t dim_ = 0;
  std::size_t k_ = 5;
  std::vector<FeatureVector> examples_;
  std::vector<Impact> labels_;
  std::vector<double> weights_;
  std::vector<std::vector<Posting>> postings_;  // per dimension, unit-normalized values
};

inline KnnModel train_knn(std::span<const FeatureVector> xs, std::span<const Impact> ys, const TrainOptions& opt = {}) {
  const std::size_t dim = validate_training(xs, ys);
  if (opt.knn_k == 0) throw Error("k must be positive");
  return KnnModel(dim, opt.knn_k, std::vector<FeatureVector>(xs.begin(), xs.end()), std::vector<Impact>(ys.begin(), ys.end()),
                  sample_weights(ys, opt.balanced_class_weights));
}

}  // namespace postimpact
