#pragma once

// Independent reference implementations used by the unit tests and the
// acceptance run.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "postimpact/features.hpp"
#include "postimpact/rng.hpp"

namespace testing_support {

namespace pi = postimpact;

// Random integer-valued vectors; small values and few dimensions so that
// exact duplicates and parallel vectors (similarity ties) are common.
inline std::vector<pi::FeatureVector> random_int_vectors(pi::Rng& rng, std::size_t n, std::size_t dim) {
  std::vector<pi::FeatureVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim, 0.0);
    for (auto& x : v)
      if (rng.uniform() < 0.4) x = static_cast<double>(1 + rng.below(3));
    out.push_back(pi::FeatureVector::from_dense(v));
  }
  return out;
}

// Exact cosine ordering over integer vectors: compares a.q/|a| with b.q/|b|
// without rounding by cross-multiplying squares.
struct ExactCosine {
  std::int64_t dot;
  std::int64_t norm2;  // 0 for the zero vector
};

inline ExactCosine exact(const pi::FeatureVector& a, const pi::FeatureVector& q) {
  const auto da = a.dense();
  const auto dq = q.dense();
  std::int64_t dot = 0, n = 0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    dot += static_cast<std::int64_t>(da[i]) * static_cast<std::int64_t>(dq[i]);
    n += static_cast<std::int64_t>(da[i]) * static_cast<std::int64_t>(da[i]);
  }
  return {dot, n};
}

// true iff sim(a) > sim(b); zero vectors have similarity 0.
inline bool more_similar(const ExactCosine& a, const ExactCosine& b) {
  auto sign = [](const ExactCosine& c) { return c.norm2 == 0 ? 0 : (c.dot > 0) - (c.dot < 0); };
  if (sign(a) != sign(b)) return sign(a) > sign(b);
  if (sign(a) == 0) return false;
  const __int128 lhs = static_cast<__int128>(a.dot) * a.dot * b.norm2;
  const __int128 rhs = static_cast<__int128>(b.dot) * b.dot * a.norm2;
  return sign(a) > 0 ? lhs > rhs : lhs < rhs;
}

inline std::vector<std::size_t> brute_force_neighbors(const std::vector<pi::FeatureVector>& train, const pi::FeatureVector& q, std::size_t k) {
  std::vector<ExactCosine> sims;
  const bool zero_query = q.entries.empty();
  for (const auto& t : train) sims.push_back(zero_query ? ExactCosine{0, 0} : exact(t, q));
  std::vector<std::size_t> idx(train.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return more_similar(sims[a], sims[b]); });
  idx.resize(std::min(k, idx.size()));
  return idx;
}

}  // namespace testing_support
