#pragma once

// Feature blocks (content, behavioral, style, interaction, time), their
// training-fold statistics and min-max normalization into [0, 1].

#include <algorithm>
#include <array>
#include <bitset>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corpus.hpp"
#include "errors.hpp"
#include "textprep.hpp"
#include "unicode.hpp"

namespace postimpact {

// ---------------------------------------------------------------------------
// Sparse vectors

struct SparseEntry {
  std::uint32_t index;
  double value;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Entries sorted by index, no explicit zeros.
struct FeatureVector {
  std::size_t dim = 0;
  std::vector<SparseEntry> entries;

  double at(std::size_t i) const {
    const auto it = std::lower_bound(entries.begin(), entries.end(), i,
                                     [](const SparseEntry& e, std::size_t idx) { return e.index < idx; });
    return (it != entries.end() && it->index == i) ? it->value : 0.0;
  }

  std::vector<double> dense() const {
    std::vector<double> out(dim, 0.0);
    for (const auto& e : entries) out[e.index] = e.value;
    return out;
  }

  static FeatureVector from_dense(std::span<const double> values) {
    FeatureVector v;
    v.dim = values.size();
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] != 0.0) v.entries.push_back({static_cast<std::uint32_t>(i), values[i]});
    return v;
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// ---------------------------------------------------------------------------
// Configuration

enum class FeatureBlock { Content = 0, Behavioral = 1, Style = 2, Interaction = 3, Time = 4 };

inline constexpr std::array<FeatureBlock, 5> kBlockOrder = {FeatureBlock::Content, FeatureBlock::Behavioral,
                                                            FeatureBlock::Style, FeatureBlock::Interaction,
                                                            FeatureBlock::Time};

inline char block_letter(FeatureBlock b) { return "cbsit"[static_cast<int>(b)]; }

inline constexpr std::size_t kBehavioralDims = 4;
inline constexpr std::size_t kStyleDims = 5;
inline constexpr std::size_t kInteractionDims = 4;
inline constexpr std::size_t kTimeDims = 4;
inline constexpr std::size_t kDefaultVocabularyCap = 10'000;

struct FeatureConfig {
  std::bitset<5> enabled;
  std::size_t vocab_size_cap = kDefaultVocabularyCap;

  bool has(FeatureBlock b) const { return enabled.test(static_cast<std::size_t>(b)); }
  FeatureConfig& with(FeatureBlock b) {
    enabled.set(static_cast<std::size_t>(b));
    return *this;
  }

  /// Canonical name such as "c+b+s" (blocks in c, b, s, i, t order).
  std::string name() const {
    std::string out;
    for (FeatureBlock b : kBlockOrder) {
      if (!has(b)) continue;
      if (!out.empty()) out += '+';
      out += block_letter(b);
    }
    return out;
  }

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// Accepts "c,b,s", "c+b+s", "cbs" or "content,style", and "all".
inline std::optional<FeatureConfig> parse_feature_config(std::string_view s,
                                                         std::size_t vocab_cap = kDefaultVocabularyCap) {
  FeatureConfig cfg;
  cfg.vocab_size_cap = vocab_cap;
  if (s == "all") {
    cfg.enabled.set();
    return cfg;
  }
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == ',' || s[i] == '+' || s[i] == ' ') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && s[j] != ',' && s[j] != '+' && s[j] != ' ') ++j;
    const auto word = s.substr(i, j - i);
    auto set_word = [&](std::string_view w) -> bool {
      static constexpr std::array<std::string_view, 5> names = {"content", "behavioral", "style", "interaction", "time"};
      for (std::size_t k = 0; k < 5; ++k) {
        if (w == names[k]) {
          cfg.enabled.set(k);
          return true;
        }
      }
      for (char c : w) {
        const auto pos = std::string_view("cbsit").find(c);
        if (pos == std::string_view::npos) return false;
        cfg.enabled.set(pos);
      }
      return true;
    };
    if (!set_word(word)) return std::nullopt;
    i = j;
  }
  if (cfg.enabled.none()) return std::nullopt;
  return cfg;
}

// ---------------------------------------------------------------------------
// Vocabulary

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Tokens in index order with their training frequencies.
  Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> frequencies)
      : tokens_(std::move(tokens)), frequencies_(std::move(frequencies)) {
    for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<std::uint32_t>(i));
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::vector<std::uint64_t>& frequencies() const noexcept { return frequencies_; }
  const std::string& token(std::size_t i) const { return tokens_.at(i); }

  std::optional<std::uint32_t> find(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(std::string_view token) const { return find(token).has_value(); }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> frequencies_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

namespace detail {

inline Vocabulary rank_vocabulary(const std::unordered_map<std::string, std::uint64_t>& freq, std::size_t cap) {
  std::vector<std::pair<std::string, std::uint64_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > cap) ranked.resize(cap);
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
  tokens.reserve(ranked.size());
  counts.reserve(ranked.size());
  for (auto& [tok, n] : ranked) {
    tokens.push_back(std::move(tok));
    counts.push_back(n);
  }
  return Vocabulary(std::move(tokens), std::move(counts));
}

}  // namespace detail

/// The `cap` most frequent tokens; ties broken by ascending token bytes.
inline Vocabulary build_vocabulary(std::span<const TokenStream> docs, std::size_t cap) {
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& doc : docs)
    for (const auto& tok : doc) ++freq[tok];
  return detail::rank_vocabulary(freq, cap);
}

// ---------------------------------------------------------------------------
// Time profile

/// Fractions of training posts per hour, weekday, month and year bucket.
struct TimeProfile {
  std::array<double, 24> hour{};
  std::array<double, 7> weekday{};  // 0 = Sunday
  std::array<double, 12> month{};   // index 0 = January
  std::map<int, double> year;

  friend bool operator==(const TimeProfile&, const TimeProfile&) = default;
};

inline TimeProfile build_time_profile(std::span<const Timestamp> times) {
  TimeProfile p;
  if (times.empty()) return p;
  std::array<std::size_t, 24> h{};
  std::array<std::size_t, 7> w{};
  std::array<std::size_t, 12> m{};
  std::map<int, std::size_t> y;
  for (const auto& t : times) {
    ++h[static_cast<std::size_t>(t.hour)];
    ++w[static_cast<std::size_t>(t.weekday())];
    ++m[static_cast<std::size_t>(t.month - 1)];
    ++y[t.year];
  }
  const auto n = static_cast<double>(times.size());
  for (std::size_t i = 0; i < 24; ++i) p.hour[i] = static_cast<double>(h[i]) / n;
  for (std::size_t i = 0; i < 7; ++i) p.weekday[i] = static_cast<double>(w[i]) / n;
  for (std::size_t i = 0; i < 12; ++i) p.month[i] = static_cast<double>(m[i]) / n;
  for (const auto& [year, c] : y) p.year[year] = static_cast<double>(c) / n;
  return p;
}

// ---------------------------------------------------------------------------
// Extractors

/// [word_count, uppercase, lowercase, numerals, symbols] over raw text.
/// Words are maximal runs of non-whitespace; symbols are codepoints that are
/// neither letters, digits nor whitespace.
inline std::array<double, kStyleDims> extract_style(std::string_view raw_text) {
  std::size_t words = 0, upper = 0, lower = 0, digits = 0, symbols = 0;
  bool in_word = false;
  unicode::for_each_codepoint(raw_text, [&](const unicode::Codepoint& cp) {
    const char32_t c = cp.value;
    if (unicode::is_whitespace(c)) {
      in_word = false;
      return;
    }
    if (!in_word) {
      ++words;
      in_word = true;
    }
    if (unicode::is_letter(c)) {
      if (unicode::is_upper(c)) ++upper;
      else if (unicode::is_lower(c)) ++lower;
    } else if (unicode::is_digit(c)) {
      ++digits;
    } else {
      ++symbols;
    }
  });
  return {static_cast<double>(words), static_cast<double>(upper), static_cast<double>(lower),
          static_cast<double>(digits), static_cast<double>(symbols)};
}

/// [emojis, hashtags, mentions, links].
inline std::array<double, kBehavioralDims> extract_behavioral(const TagCounts& counts) {
  return {static_cast<double>(counts.emojis), static_cast<double>(counts.hashtags),
          static_cast<double>(counts.mentions), static_cast<double>(counts.urls)};
}

inline std::array<double, kBehavioralDims> extract_behavioral(const NormalizedText& text) {
  return extract_behavioral(text.counts);
}

/// [images, albums, videos, other links].
inline std::array<double, kInteractionDims> extract_interaction(LinkKind kind) {
  std::array<double, kInteractionDims> out{};
  switch (kind) {
    case LinkKind::Image: out[0] = 1.0; break;
    case LinkKind::Album: out[1] = 1.0; break;
    case LinkKind::Video: out[2] = 1.0; break;
    case LinkKind::Other: out[3] = 1.0; break;
    case LinkKind::None: break;
  }
  return out;
}

inline std::array<double, kInteractionDims> extract_interaction(const Post& post) {
  return extract_interaction(post.link_kind);
}

/// [hour share, weekday share, month share, year share] among training posts.
inline std::array<double, kTimeDims> extract_time(const Timestamp& t, const TimeProfile& profile) {
  const auto y = profile.year.find(t.year);
  return {profile.hour[static_cast<std::size_t>(t.hour)], profile.weekday[static_cast<std::size_t>(t.weekday())],
          profile.month[static_cast<std::size_t>(t.month - 1)], y == profile.year.end() ? 0.0 : y->second};
}

inline std::array<double, kTimeDims> extract_time(const Post& post, const TimeProfile& profile) {
  return extract_time(post.published_at, profile);
}

/// Everything the pipeline needs from one post, computed once.
struct PostAnalysis {
  TokenStream tokens;
  std::array<double, kStyleDims> style{};
  std::array<double, kBehavioralDims> behavioral{};
  std::array<double, kInteractionDims> interaction{};
  Timestamp published_at;
};

inline PostAnalysis analyze(std::string_view raw_text, LinkKind link_kind, const Timestamp& published_at) {
  const NormalizedText norm = normalize(raw_text);
  PostAnalysis a;
  a.tokens = tokenize(norm);
  a.style = extract_style(raw_text);
  a.behavioral = extract_behavioral(norm);
  a.interaction = extract_interaction(link_kind);
  a.published_at = published_at;
  return a;
}

inline PostAnalysis analyze(const Post& post) { return analyze(post.text, post.link_kind, post.published_at); }

/// Total dimensionality of the enabled blocks.
inline std::size_t dimensionality(const FeatureConfig& config, std::size_t vocabulary_size) {
  std::size_t d = 0;
  if (config.has(FeatureBlock::Content)) d += vocabulary_size;
  if (config.has(FeatureBlock::Behavioral)) d += kBehavioralDims;
  if (config.has(FeatureBlock::Style)) d += kStyleDims;
  if (config.has(FeatureBlock::Interaction)) d += kInteractionDims;
  if (config.has(FeatureBlock::Time)) d += kTimeDims;
  return d;
}

/// Raw (unnormalized) vector in block order [c | b | s | i | t].
inline FeatureVector vectorize(const PostAnalysis& a, const FeatureConfig& config, const Vocabulary* vocabulary,
                               const TimeProfile* profile) {
  const bool content = config.has(FeatureBlock::Content);
  if (content && vocabulary == nullptr) throw MissingVocabulary();
  FeatureVector v;
  v.dim = dimensionality(config, content ? vocabulary->size() : 0);
  std::uint32_t offset = 0;
  auto push = [&](std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] != 0.0) v.entries.push_back({offset + static_cast<std::uint32_t>(i), values[i]});
    offset += static_cast<std::uint32_t>(values.size());
  };
  if (content) {
    std::map<std::uint32_t, double> counts;
    for (const auto& tok : a.tokens)
      if (const auto idx = vocabulary->find(tok)) counts[*idx] += 1.0;
    for (const auto& [idx, c] : counts) v.entries.push_back({idx, c});
    offset += static_cast<std::uint32_t>(vocabulary->size());
  }
  if (config.has(FeatureBlock::Behavioral)) push(a.behavioral);
  if (config.has(FeatureBlock::Style)) push(a.style);
  if (config.has(FeatureBlock::Interaction)) push(a.interaction);
  if (config.has(FeatureBlock::Time)) {
    const TimeProfile empty{};
    push(extract_time(a.published_at, profile ? *profile : empty));
  }
  return v;
}

inline FeatureVector vectorize(const Post& post, const FeatureConfig& config, const Vocabulary* vocabulary,
                               const TimeProfile* profile) {
  return vectorize(analyze(post), config, vocabulary, profile);
}

// ---------------------------------------------------------------------------
// Normalization

/// Per-dimension min-max scaling fitted on training vectors. Raw features are
/// non-negative, so implicit zeros stay zero after scaling and clamping.
struct Normalizer {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t dim() const noexcept { return min.size(); }

  friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

inline Normalizer fit_normalizer(std::span<const FeatureVector> training, std::size_t dim) {
  Normalizer n;
  n.min.assign(dim, 0.0);
  n.max.assign(dim, 0.0);
  if (training.empty()) return n;
  std::vector<std::size_t> present(dim, 0);
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
  for (const auto& v : training) {
    if (v.dim != dim) throw DimensionMismatch(dim, v.dim);
    for (const auto& e : v.entries) {
      ++present[e.index];
      lo[e.index] = std::min(lo[e.index], e.value);
      hi[e.index] = std::max(hi[e.index], e.value);
    }
  }
  for (std::size_t d = 0; d < dim; ++d) {
    if (present[d] == 0) continue;
    const bool has_zero = present[d] < training.size();
    n.min[d] = has_zero ? std::min(0.0, lo[d]) : lo[d];
    n.max[d] = has_zero ? std::max(0.0, hi[d]) : hi[d];
  }
  return n;
}

inline FeatureVector apply_normalizer(const FeatureVector& v, const Normalizer& n) {
  if (v.dim != n.dim()) throw DimensionMismatch(n.dim(), v.dim);
  FeatureVector out;
  out.dim = v.dim;
  out.entries.reserve(v.entries.size());
  for (const auto& e : v.entries) {
    const double lo = n.min[e.index];
    const double hi = n.max[e.index];
    if (!(hi > lo)) continue;
    const double scaled = std::clamp((e.value - lo) / (hi - lo), 0.0, 1.0);
    if (scaled != 0.0) out.entries.push_back({e.index, scaled});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fitted pipeline

/// Training-fold state needed to turn a post into a normalized vector.
struct FeaturePipeline {
  FeatureConfig config;
  std::optional<Vocabulary> vocabulary;
  std::optional<TimeProfile> time_profile;
  Normalizer normalizer;

  std::size_t dim() const { return normalizer.dim(); }

  FeatureVector raw(const PostAnalysis& a) const {
    return vectorize(a, config, vocabulary ? &*vocabulary : nullptr, time_profile ? &*time_profile : nullptr);
  }

  FeatureVector transform(const PostAnalysis& a) const { return apply_normalizer(raw(a), normalizer); }
};

/// Fits vocabulary, time profile and normalizer on `training` only.
inline FeaturePipeline fit_pipeline(const FeatureConfig& config, std::span<const PostAnalysis* const> training) {
  FeaturePipeline p;
  p.config = config;
  if (config.has(FeatureBlock::Content)) {
    std::unordered_map<std::string, std::uint64_t> freq;
    for (const auto* a : training)
      for (const auto& tok : a->tokens) ++freq[tok];
    p.vocabulary = detail::rank_vocabulary(freq, config.vocab_size_cap);
  }
  if (config.has(FeatureBlock::Time)) {
    std::vector<Timestamp> times;
    times.reserve(training.size());
    for (const auto* a : training) times.push_back(a->published_at);
    p.time_profile = build_time_profile(times);
  }
  std::vector<FeatureVector> raw;
  raw.reserve(training.size());
  for (const auto* a : training) raw.push_back(p.raw(*a));
  p.normalizer = fit_normalizer(raw, dimensionality(config, p.vocabulary ? p.vocabulary->size() : 0));
  return p;
}

}  // namespace postimpact
