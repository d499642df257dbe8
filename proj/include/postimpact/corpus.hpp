#pragma once

// Post records, the corpus line format, filtering, mean-threshold labeling and
// per-brand corpus statistics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "timestamp.hpp"
#include "unicode.hpp"

namespace postimpact {

enum class LinkKind { Image, Album, Video, Other, None };

inline std::string_view to_string(LinkKind k) {
  switch (k) {
    case LinkKind::Image: return "image";
    case LinkKind::Album: return "album";
    case LinkKind::Video: return "video";
    case LinkKind::Other: return "other";
    case LinkKind::None: return "none";
  }
  return "none";
}

inline std::optional<LinkKind> parse_link_kind(std::string_view s) {
  if (s == "image" || s == "photo") return LinkKind::Image;
  if (s == "album") return LinkKind::Album;
  if (s == "video") return LinkKind::Video;
  if (s == "other" || s == "link") return LinkKind::Other;
  if (s == "none" || s.empty()) return LinkKind::None;
  return std::nullopt;
}

struct ReactionCounts {
  std::uint64_t like = 0;
  std::uint64_t love = 0;
  std::uint64_t haha = 0;
  std::uint64_t wow = 0;
  std::uint64_t sad = 0;
  std::uint64_t angry = 0;

  std::uint64_t total() const noexcept { return like + love + haha + wow + sad + angry; }
  std::uint64_t positive() const noexcept { return like + love; }
  std::uint64_t negative() const noexcept { return sad + angry; }
  std::uint64_t neutral() const noexcept { return wow + haha; }

  friend bool operator==(const ReactionCounts&, const ReactionCounts&) = default;
};

enum class ProblemKind { TotalReactions, PositiveReactions, NegativeReactions, NeutralReactions, Comments, Shares };

inline constexpr std::array<ProblemKind, 6> kAllProblems = {
    ProblemKind::TotalReactions,    ProblemKind::PositiveReactions, ProblemKind::NegativeReactions,
    ProblemKind::NeutralReactions,  ProblemKind::Comments,          ProblemKind::Shares};

inline std::size_t index_of(ProblemKind k) { return static_cast<std::size_t>(k); }

/// Stable identifier used in files, JSON payloads and the HTTP API.
inline std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::TotalReactions: return "total_reactions";
    case ProblemKind::PositiveReactions: return "positive_reactions";
    case ProblemKind::NegativeReactions: return "negative_reactions";
    case ProblemKind::NeutralReactions: return "neutral_reactions";
    case ProblemKind::Comments: return "comments";
    case ProblemKind::Shares: return "shares";
  }
  return "";
}

/// Short code: R, R+, R-, R0, C, S.
inline std::string_view short_code(ProblemKind k) {
  switch (k) {
    case ProblemKind::TotalReactions: return "R";
    case ProblemKind::PositiveReactions: return "R+";
    case ProblemKind::NegativeReactions: return "R-";
    case ProblemKind::NeutralReactions: return "R0";
    case ProblemKind::Comments: return "C";
    case ProblemKind::Shares: return "S";
  }
  return "";
}

inline std::optional<ProblemKind> parse_problem(std::string_view s) {
  for (ProblemKind k : kAllProblems)
    if (s == to_string(k) || s == short_code(k)) return k;
  if (s == "total") return ProblemKind::TotalReactions;
  if (s == "positive") return ProblemKind::PositiveReactions;
  if (s == "negative") return ProblemKind::NegativeReactions;
  if (s == "neutral") return ProblemKind::NeutralReactions;
  return std::nullopt;
}

struct Post {
  std::string id;
  std::string brand;
  std::string text;
  Timestamp published_at;
  LinkKind link_kind = LinkKind::None;
  ReactionCounts reactions;
  std::uint64_t comments = 0;
  std::uint64_t shares = 0;

  friend bool operator==(const Post&, const Post&) = default;
};

inline std::uint64_t metric(const Post& p, ProblemKind k) {
  switch (k) {
    case ProblemKind::TotalReactions: return p.reactions.total();
    case ProblemKind::PositiveReactions: return p.reactions.positive();
    case ProblemKind::NegativeReactions: return p.reactions.negative();
    case ProblemKind::NeutralReactions: return p.reactions.neutral();
    case ProblemKind::Comments: return p.comments;
    case ProblemKind::Shares: return p.shares;
  }
  return 0;
}

enum class Impact { Low = 0, High = 1 };

inline std::string_view to_string(Impact i) { return i == Impact::High ? "high" : "low"; }

struct LabeledPost {
  Post post;
  std::array<Impact, 6> labels{};

  Impact label(ProblemKind k) const { return labels[index_of(k)]; }
};

// ---------------------------------------------------------------------------
// Corpus line format: one JSON object per line.

namespace detail {

inline std::uint64_t read_count(const nlohmann::json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw MalformedRecord(line, std::string("missing field '") + key + "'");
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  if (it->is_number_integer()) {
    const auto v = it->get<std::int64_t>();
    if (v < 0) throw MalformedRecord(line, std::string("negative count in '") + key + "'");
    return static_cast<std::uint64_t>(v);
  }
  throw MalformedRecord(line, std::string("field '") + key + "' is not an integer");
}

inline std::string read_string(const nlohmann::json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw MalformedRecord(line, std::string("missing field '") + key + "'");
  if (!it->is_string()) throw MalformedRecord(line, std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

}  // namespace detail

/// Decodes one record. `line` is used for error reporting only.
inline Post parse_post(const nlohmann::json& obj, std::size_t line) {
  if (!obj.is_object()) throw MalformedRecord(line, "record is not an object");
  Post p;
  p.id = detail::read_string(obj, "id", line);
  if (p.id.empty()) throw MalformedRecord(line, "empty id");
  p.brand = detail::read_string(obj, "brand", line);
  p.text = detail::read_string(obj, "text", line);
  const auto ts = detail::read_string(obj, "published_at", line);
  const auto parsed = parse_iso8601(ts);
  if (!parsed) throw MalformedRecord(line, "invalid published_at '" + ts + "'");
  p.published_at = *parsed;
  const auto lk = detail::read_string(obj, "link_kind", line);
  const auto kind = parse_link_kind(lk);
  if (!kind) throw MalformedRecord(line, "unknown link_kind '" + lk + "'");
  p.link_kind = *kind;
  p.reactions.like = detail::read_count(obj, "like", line);
  p.reactions.love = detail::read_count(obj, "love", line);
  p.reactions.haha = detail::read_count(obj, "haha", line);
  p.reactions.wow = detail::read_count(obj, "wow", line);
  p.reactions.sad = detail::read_count(obj, "sad", line);
  p.reactions.angry = detail::read_count(obj, "angry", line);
  p.comments = detail::read_count(obj, "comments", line);
  p.shares = detail::read_count(obj, "shares", line);
  return p;
}

inline nlohmann::ordered_json to_json(const Post& p) {
  nlohmann::ordered_json j;
  j["id"] = p.id;
  j["brand"] = p.brand;
  j["text"] = p.text;
  j["published_at"] = p.published_at.to_iso();
  j["link_kind"] = to_string(p.link_kind);
  j["like"] = p.reactions.like;
  j["love"] = p.reactions.love;
  j["haha"] = p.reactions.haha;
  j["wow"] = p.reactions.wow;
  j["sad"] = p.reactions.sad;
  j["angry"] = p.reactions.angry;
  j["comments"] = p.comments;
  j["shares"] = p.shares;
  return j;
}

inline nlohmann::ordered_json to_json(const LabeledPost& lp) {
  auto j = to_json(lp.post);
  nlohmann::ordered_json labels;
  for (ProblemKind k : kAllProblems) labels[std::string(to_string(k))] = to_string(lp.label(k));
  j["labels"] = std::move(labels);
  return j;
}

/// Parsed corpus. `labels` is populated only when every record carries a
/// `labels` object (files written by `label --out`).
struct CorpusFile {
  std::vector<Post> posts;
  std::optional<std::vector<LabeledPost>> labeled;
};

namespace detail {

inline std::optional<std::array<Impact, 6>> parse_labels(const nlohmann::json& obj, std::size_t line) {
  const auto it = obj.find("labels");
  if (it == obj.end()) return std::nullopt;
  if (!it->is_object()) throw MalformedRecord(line, "'labels' is not an object");
  std::array<Impact, 6> out{};
  for (ProblemKind k : kAllProblems) {
    const auto f = it->find(std::string(to_string(k)));
    if (f == it->end() || !f->is_string()) throw MalformedRecord(line, "labels missing '" + std::string(to_string(k)) + "'");
    const auto v = f->get<std::string>();
    if (v == "high") out[index_of(k)] = Impact::High;
    else if (v == "low") out[index_of(k)] = Impact::Low;
    else throw MalformedRecord(line, "invalid label '" + v + "'");
  }
  return out;
}

}  // namespace detail

/// Reads a corpus stream, throwing on the first malformed record or repeated id.
inline CorpusFile read_corpus(std::istream& in) {
  CorpusFile out;
  std::vector<LabeledPost> labeled;
  bool all_labeled = true;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (unicode::trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw MalformedRecord(line_no, std::string("invalid JSON: ") + e.what());
    }
    Post p = parse_post(obj, line_no);
    if (!ids.insert(p.id).second) throw DuplicateId(p.id);
    const auto labels = detail::parse_labels(obj, line_no);
    if (labels && all_labeled) labeled.push_back({p, *labels});
    else all_labeled = false;
    out.posts.push_back(std::move(p));
  }
  if (all_labeled && !out.posts.empty()) out.labeled = std::move(labeled);
  return out;
}

/// Posts in input order.
inline std::vector<Post> ingest(std::istream& in) { return read_corpus(in).posts; }

inline void write_corpus(std::ostream& out, const std::vector<Post>& posts) {
  for (const auto& p : posts) out << to_json(p).dump() << '\n';
}

inline void write_corpus(std::ostream& out, const std::vector<LabeledPost>& posts) {
  for (const auto& p : posts) out << to_json(p).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Filtering

enum class RemovalReason { NoText, NoReactions, OnlyLike };

inline std::string_view to_string(RemovalReason r) {
  switch (r) {
    case RemovalReason::NoText: return "no_text";
    case RemovalReason::NoReactions: return "no_reactions";
    case RemovalReason::OnlyLike: return "only_like";
  }
  return "";
}

inline std::optional<RemovalReason> removal_reason(const Post& p) {
  if (unicode::trim(p.text).empty()) return RemovalReason::NoText;
  if (p.reactions.total() == 0) return RemovalReason::NoReactions;
  if (p.reactions.like > 0 && p.reactions.total() == p.reactions.like) return RemovalReason::OnlyLike;
  return std::nullopt;
}

struct FilterResult {
  std::vector<Post> kept;
  std::vector<std::pair<Post, RemovalReason>> removed;
};

inline FilterResult filter(std::vector<Post> posts) {
  FilterResult r;
  for (auto& p : posts) {
    if (const auto reason = removal_reason(p)) r.removed.emplace_back(std::move(p), *reason);
    else r.kept.push_back(std::move(p));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Labeling

/// Per-problem means over the whole input, in kAllProblems order.
inline std::array<double, 6> metric_means(const std::vector<Post>& posts) {
  if (posts.empty()) throw EmptyCorpus();
  std::array<long double, 6> sums{};
  for (const auto& p : posts)
    for (ProblemKind k : kAllProblems) sums[index_of(k)] += static_cast<long double>(metric(p, k));
  std::array<double, 6> means{};
  for (std::size_t i = 0; i < 6; ++i) means[i] = static_cast<double>(sums[i] / static_cast<long double>(posts.size()));
  return means;
}

/// High iff the metric strictly exceeds the corpus mean. The comparison is
/// done exactly as value * N > sum, so ties at the mean are never High.
inline std::vector<LabeledPost> label(const std::vector<Post>& posts) {
  if (posts.empty()) throw EmptyCorpus();
  std::array<unsigned __int128, 6> sums{};
  for (const auto& p : posts)
    for (ProblemKind k : kAllProblems) sums[index_of(k)] += metric(p, k);
  const auto n = static_cast<unsigned __int128>(posts.size());
  std::vector<LabeledPost> out;
  out.reserve(posts.size());
  for (const auto& p : posts) {
    LabeledPost lp{p, {}};
    for (ProblemKind k : kAllProblems) {
      const auto v = static_cast<unsigned __int128>(metric(p, k));
      lp.labels[index_of(k)] = v * n > sums[index_of(k)] ? Impact::High : Impact::Low;
    }
    out.push_back(std::move(lp));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Statistics

/// Mean and population standard deviation.
struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / static_cast<double>(xs.size()))};
}

struct BrandStats {
  std::string brand;
  std::size_t posts = 0;
  std::size_t token_count = 0;
  std::size_t vocabulary_size = 0;
  double lexical_richness = 0.0;
  MeanStd tokens_per_post;
  MeanStd chars_per_post;
};

struct CorpusStats {
  std::vector<BrandStats> brands;  // sorted by brand name
};

/// Stats for one group of posts. `tokenize` maps raw post text to tokens.
template <typename Tokenizer>
BrandStats compute_brand_stats(const std::string& brand, const std::vector<const Post*>& posts, Tokenizer&& tokenize) {
  if (posts.empty()) throw EmptyBrand(brand);
  BrandStats s;
  s.brand = brand;
  s.posts = posts.size();
  std::unordered_set<std::string> vocab;
  std::vector<double> tok_counts, char_counts;
  tok_counts.reserve(posts.size());
  char_counts.reserve(posts.size());
  for (const Post* p : posts) {
    const std::vector<std::string> tokens = tokenize(p->text);
    s.token_count += tokens.size();
    vocab.insert(tokens.begin(), tokens.end());
    tok_counts.push_back(static_cast<double>(tokens.size()));
    char_counts.push_back(static_cast<double>(unicode::codepoint_count(p->text)));
  }
  s.vocabulary_size = vocab.size();
  s.lexical_richness = s.token_count == 0 ? 0.0 : static_cast<double>(s.vocabulary_size) / static_cast<double>(s.token_count);
  s.tokens_per_post = mean_std(tok_counts);
  s.chars_per_post = mean_std(char_counts);
  return s;
}

template <typename Tokenizer>
CorpusStats compute_stats(const std::vector<Post>& posts, Tokenizer&& tokenize) {
  std::map<std::string, std::vector<const Post*>> groups;
  for (const auto& p : posts) groups[p.brand].push_back(&p);
  CorpusStats stats;
  for (const auto& [brand, group] : groups) stats.brands.push_back(compute_brand_stats(brand, group, tokenize));
  return stats;
}

}  // namespace postimpact
