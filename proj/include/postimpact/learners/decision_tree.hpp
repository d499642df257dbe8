#pragma once

// CART classification tree with Gini impurity and midpoint thresholds.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "common.hpp"

namespace postimpact {

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double high_fraction = 0.0;  // weighted share of High among training samples at this node
  std::uint32_t samples = 0;

  bool is_leaf() const noexcept { return feature < 0; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTreeModel {
  std::size_t dim = 0;
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  Prediction predict(const FeatureVector& x) const {
    check_dim(dim, x);
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      i = static_cast<std::size_t>(x.at(static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left : n.right);
    }
    return make_prediction(nodes[i].high_fraction);
  }

  std::size_t depth() const {
    if (nodes.empty()) return 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    std::size_t best = 0;
    while (!stack.empty()) {
      const auto [i, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      if (!nodes[i].is_leaf()) {
        stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
        stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
      }
    }
    return best;
  }

  friend bool operator==(const DecisionTreeModel&, const DecisionTreeModel&) = default;
};

namespace tree_detail {

inline double gini(double high, double low) {
  const double n = high + low;
  if (n <= 0.0) return 0.0;
  const double p = high / n;
  return 2.0 * p * (1.0 - p);
}

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

struct ValueMass {
  double value;
  double high;
  double low;
};

class Builder {
 public:
  Builder(std::span<const FeatureVector> xs, std::span<const Impact> ys, std::vector<double> weights,
          const TrainOptions& opt)
      : xs_(xs), ys_(ys), w_(std::move(weights)), opt_(opt) {}

  DecisionTreeModel build(std::size_t dim) {
    DecisionTreeModel m;
    m.dim = dim;
    std::vector<std::uint32_t> all(xs_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
    grow(m, std::move(all), 0);
    return m;
  }

 private:
  std::int32_t grow(DecisionTreeModel& m, std::vector<std::uint32_t> samples, std::size_t depth) {
    double high = 0.0, low = 0.0;
    for (auto i : samples) (ys_[i] == Impact::High ? high : low) += w_[i];
    const auto id = static_cast<std::int32_t>(m.nodes.size());
    TreeNode node;
    node.high_fraction = high + low > 0.0 ? high / (high + low) : 0.0;
    node.samples = static_cast<std::uint32_t>(samples.size());
    m.nodes.push_back(node);

    const bool pure = high == 0.0 || low == 0.0;
    if (pure || depth >= opt_.dt_max_depth || samples.size() < opt_.dt_min_samples_split) return id;

    const Split split = best_split(samples, high, low);
    if (split.feature < 0) return id;

    std::vector<std::uint32_t> left, right;
    for (auto i : samples)
      (xs_[i].at(static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(i);
    samples.clear();
    samples.shrink_to_fit();

    const auto l = grow(m, std::move(left), depth + 1);
    const auto r = grow(m, std::move(right), depth + 1);
    m.nodes[static_cast<std::size_t>(id)].feature = split.feature;
    m.nodes[static_cast<std::size_t>(id)].threshold = split.threshold;
    m.nodes[static_cast<std::size_t>(id)].left = l;
    m.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  /// Lowest weighted child Gini over all features and midpoints; ties go to
  /// the lower feature index, then the lower threshold.
  Split best_split(const std::vector<std::uint32_t>& samples, double high, double low) const {
    // Gather the non-zero entries of the node's samples per feature.
    std::unordered_map<std::uint32_t, std::vector<ValueMass>> columns;
    for (auto i : samples) {
      const double wh = ys_[i] == Impact::High ? w_[i] : 0.0;
      const double wl = ys_[i] == Impact::High ? 0.0 : w_[i];
      for (const auto& e : xs_[i].entries) columns[e.index].push_back({e.value, wh, wl});
    }
    std::vector<std::uint32_t> features;
    features.reserve(columns.size());
    for (const auto& [f, _] : columns) features.push_back(f);
    std::sort(features.begin(), features.end());

    const double total = high + low;
    Split best;
    best.impurity = std::numeric_limits<double>::infinity();
    std::vector<ValueMass> merged;
    for (auto f : features) {
      auto& col = columns[f];
      double nz_high = 0.0, nz_low = 0.0;
      for (const auto& v : col) {
        nz_high += v.high;
        nz_low += v.low;
      }
      if (col.size() < samples.size()) col.push_back({0.0, high - nz_high, low - nz_low});
      std::sort(col.begin(), col.end(), [](const ValueMass& a, const ValueMass& b) { return a.value < b.value; });
      merged.clear();
      for (const auto& v : col) {
        if (!merged.empty() && merged.back().value == v.value) {
          merged.back().high += v.high;
          merged.back().low += v.low;
        } else {
          merged.push_back(v);
        }
      }
      double lh = 0.0, ll = 0.0;
      for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
        lh += merged[k].high;
        ll += merged[k].low;
        const double rh = high - lh, rl = low - ll;
        const double impurity = ((lh + ll) * gini(lh, ll) + (rh + rl) * gini(rh, rl)) / total;
        if (impurity < best.impurity - 1e-12) {
          best.feature = static_cast<std::int32_t>(f);
          best.threshold = merged[k].value + (merged[k + 1].value - merged[k].value) / 2.0;
          best.impurity = impurity;
        }
      }
    }
    return best;
  }

  std::span<const FeatureVector> xs_;
  std::span<const Impact> ys_;
  std::vector<double> w_;
  const TrainOptions& opt_;
};

}  // namespace tree_detail

inline DecisionTreeModel train_decision_tree(std::span<const FeatureVector> xs, std::span<const Impact> ys,
                                             const TrainOptions& opt = {}) {
  const std::size_t dim = validate_training(xs, ys);
  tree_detail::Builder builder(xs, ys, sample_weights(ys, opt.balanced_class_weights), opt);
  return builder.build(dim);
}

}  // namespace postimpact
