#pragma once

// Synthetic corpus with planted signal, for desk-scale checks of the
// evaluation protocol when no real data is at hand.
//
// Five latent channels (positive, negative, neutral, comments, shares) are
// switched on independently per post. An active channel always adds two of its
// hot words to the text and multiplies the matching counts. It also leaves
// either a behavioral cue or a style cue (never both), or neither, so the two
// families are complementary. Link kind and posting time are drawn
// independently of everything else.

#include <array>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "rng.hpp"
#include "timestamp.hpp"

namespace postimpact {

struct SyntheticOptions {
  std::size_t posts = 2000;
  std::uint64_t seed = 7;
  std::size_t brands = 4;
  double channel_rate = 0.2;  // P(channel active)
  double cue_rate = 0.45;     // P(behavioral cue | active) = P(style cue | active)
  double stray_cue_rate = 0.03;
};

namespace synthetic_detail {

enum Channel { kPositive, kNegative, kNeutral, kComments, kShares, kChannels };

inline const std::array<std::array<const char*, 6>, kChannels> kHotWords = {{
    {"gracias", "feliz", "amor", "increible", "felicidades", "hermoso"},
    {"triste", "lamentable", "error", "problema", "queja", "terrible"},
    {"sorprendente", "curioso", "dato", "misterio", "jaja", "asombroso"},
    {"opina", "comenta", "pregunta", "dinos", "cual", "responde"},
    {"comparte", "difunde", "concurso", "gana", "sorteo", "participa"},
}};

inline std::vector<std::string> filler_words(Rng& rng, std::size_t n) {
  static constexpr std::array<const char*, 16> syll = {"ma", "lo", "ri", "ta", "ne", "su", "ca", "po",
                                                       "de", "vi", "ra", "te", "mo", "la", "si", "no"};
  std::set<std::string> reserved;
  for (const auto& ws : kHotWords)
    for (const char* w : ws) reserved.insert(w);
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string w;
    const auto len = 2 + rng.below(2);
    for (std::uint64_t i = 0; i < len; ++i) w += syll[rng.below(syll.size())];
    if (reserved.contains(w) || !seen.insert(w).second) continue;
    out.push_back(w);
  }
  return out;
}

inline std::uint64_t draw_count(Rng& rng, double scale, double sigma) {
  return static_cast<std::uint64_t>(std::llround(scale * std::exp(sigma * rng.normal())));
}

}  // namespace synthetic_detail

inline std::vector<Post> synthesize(const SyntheticOptions& opt = {}) {
  using namespace synthetic_detail;
  Rng rng(derive_seed(opt.seed, 0x5E7));
  const auto filler = filler_words(rng, 400);
  static constexpr std::array<int, 3> kHours = {9, 13, 19};
  static constexpr std::array<LinkKind, 5> kKinds = {LinkKind::Image, LinkKind::Album, LinkKind::Video, LinkKind::Other,
                                                     LinkKind::None};

  std::vector<Post> posts;
  posts.reserve(opt.posts);
  for (std::size_t n = 0; n < opt.posts; ++n) {
    std::array<bool, kChannels> on{};
    for (auto& c : on) c = rng.uniform() < opt.channel_rate;
    std::array<bool, kChannels> behavioral{}, style{};
    for (int c = 0; c < kChannels; ++c) {
      const double u = rng.uniform();
      if (on[c]) {
        behavioral[c] = u < opt.cue_rate;
        style[c] = !behavioral[c] && u < 2 * opt.cue_rate;
      } else {
        behavioral[c] = u < opt.stray_cue_rate;
        style[c] = rng.uniform() < opt.stray_cue_rate;
      }
    }

    std::vector<std::string> words;
    const auto length = 8 + rng.below(10);
    for (std::uint64_t i = 0; i < length; ++i) words.push_back(filler[rng.below(filler.size())]);
    for (int c = 0; c < kChannels; ++c) {
      if (!on[c]) continue;
      for (int i = 0; i < 2; ++i) {
        const auto at = rng.below(words.size() + 1);
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), kHotWords[c][rng.below(6)]);
      }
    }
    if (behavioral[kPositive]) words.push_back(rng.below(2) ? "\xF0\x9F\x98\x80" : "\xF0\x9F\x8E\x89");
    if (behavioral[kNegative]) {
      words.push_back("\xF0\x9F\x98\xA2");
      words.push_back("\xF0\x9F\x98\xA2");
    }
    if (behavioral[kNeutral]) words.push_back("#sabiasque");
    if (behavioral[kComments]) words.push_back("@amigos");
    if (behavioral[kShares]) {
      words.push_back("#comparte");
      words.push_back("#regalo");
      words.push_back("#hoy");
    }
    if (style[kPositive]) words.insert(words.begin(), "GENIAL");
    if (style[kNegative]) words.push_back("2" + std::to_string(10 + rng.below(90)));
    if (style[kNeutral]) words.back() += "!!!";
    if (style[kComments])
      for (int i = 0; i < 12; ++i) words.push_back(filler[rng.below(filler.size())]);
    if (style[kShares]) words.push_back("1234567");

    Post p;
    char id[32];
    std::snprintf(id, sizeof id, "syn-%06zu", n + 1);
    p.id = id;
    p.brand = "brand_" + std::string(1, static_cast<char>('a' + n % opt.brands));
    for (std::size_t i = 0; i < words.size(); ++i) p.text += (i ? " " : "") + words[i];
    p.link_kind = kKinds[rng.below(kKinds.size())];
    p.published_at.year = 2017;
    p.published_at.month = 3 + static_cast<int>(rng.below(2));
    p.published_at.day = 1 + static_cast<int>(rng.below(28));
    p.published_at.hour = kHours[rng.below(kHours.size())];
    p.published_at.minute = static_cast<int>(rng.below(60));

    constexpr double boost = 12.0;
    const double reach = std::exp(0.4 * rng.normal());
    auto m = [&](Channel c) { return on[c] ? boost : 1.0; };
    p.reactions.like = draw_count(rng, 40.0 * reach * m(kPositive), 0.3);
    p.reactions.love = draw_count(rng, 5.0 * reach * m(kPositive), 0.3);
    p.reactions.haha = draw_count(rng, 3.0 * m(kNeutral), 0.5);
    p.reactions.wow = 1 + draw_count(rng, 3.0 * m(kNeutral), 0.5);
    p.reactions.sad = draw_count(rng, 2.0 * m(kNegative), 0.5);
    p.reactions.angry = draw_count(rng, 2.0 * m(kNegative), 0.5);
    p.comments = draw_count(rng, 6.0 * m(kComments), 0.5);
    p.shares = draw_count(rng, 4.0 * m(kShares), 0.5);
    posts.push_back(std::move(p));
  }
  return posts;
}

}  // namespace postimpact
