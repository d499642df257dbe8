#include <gtest/gtest.h>

#include <sstream>

#include "test_support.hpp"

namespace pi = postimpact;
using testing_support::likes;
using testing_support::make_post;

namespace {

const char* kRecord =
    R"({"id":"1","brand":"Clash Royale ES","text":"¡Nuevo reto! 😀","published_at":"2017-03-14T14:05:00",)"
    R"("link_kind":"video","like":10,"love":2,"haha":1,"wow":0,"sad":0,"angry":3,"comments":4,"shares":5})";

std::vector<pi::Post> posts_with_total(const std::vector<std::uint64_t>& totals) {
  std::vector<pi::Post> out;
  for (std::size_t i = 0; i < totals.size(); ++i) out.push_back(make_post("p" + std::to_string(i), "x", likes(totals[i])));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// ReactionCounts and problems

TEST(Reactions, GroupedTotals) {
  pi::ReactionCounts r{1, 2, 3, 4, 5, 6};
  EXPECT_EQ(r.total(), 21u);
  EXPECT_EQ(r.positive(), 3u);
  EXPECT_EQ(r.neutral(), 7u);
  EXPECT_EQ(r.negative(), 11u);
}

TEST(Problems, SixProblemsMapToMetrics) {
  auto p = make_post("a", "x", pi::ReactionCounts{1, 2, 3, 4, 5, 6}, 7, 8);
  EXPECT_EQ(pi::kAllProblems.size(), 6u);
  EXPECT_EQ(pi::metric(p, pi::ProblemKind::TotalReactions), 21u);
  EXPECT_EQ(pi::metric(p, pi::ProblemKind::PositiveReactions), 3u);
  EXPECT_EQ(pi::metric(p, pi::ProblemKind::NegativeReactions), 11u);
  EXPECT_EQ(pi::metric(p, pi::ProblemKind::NeutralReactions), 7u);
  EXPECT_EQ(pi::metric(p, pi::ProblemKind::Comments), 7u);
  EXPECT_EQ(pi::metric(p, pi::ProblemKind::Shares), 8u);
  for (pi::ProblemKind k : pi::kAllProblems) {
    EXPECT_EQ(pi::parse_problem(pi::to_string(k)), k);
    EXPECT_EQ(pi::parse_problem(pi::short_code(k)), k);
  }
  EXPECT_FALSE(pi::parse_problem("likes"));
}

// ---------------------------------------------------------------------------
// ingest

TEST(Ingest, EmptyStreamGivesEmptyList) {
  std::istringstream in("");
  EXPECT_TRUE(pi::ingest(in).empty());
}

TEST(Ingest, OneRecordRoundTrips) {
  std::istringstream in(kRecord);
  const auto posts = pi::ingest(in);
  ASSERT_EQ(posts.size(), 1u);
  const auto& p = posts[0];
  EXPECT_EQ(p.id, "1");
  EXPECT_EQ(p.brand, "Clash Royale ES");
  EXPECT_EQ(p.text, "¡Nuevo reto! 😀");
  EXPECT_EQ(p.link_kind, pi::LinkKind::Video);
  EXPECT_EQ(p.reactions, (pi::ReactionCounts{10, 2, 1, 0, 0, 3}));
  EXPECT_EQ(p.comments, 4u);
  EXPECT_EQ(p.shares, 5u);

  std::ostringstream out;
  pi::write_corpus(out, posts);
  std::istringstream again(out.str());
  EXPECT_EQ(pi::ingest(again), posts);
}

TEST(Ingest, MissingReactionNamesTheLine) {
  std::string missing = kRecord;
  missing.replace(missing.find(R"("like":10,)"), 10, "");
  std::istringstream in(std::string(kRecord) + "\n" + R"({"id":"2",)" + std::string(kRecord).substr(10) + "\n" +
                        R"({"id":"3",)" + missing.substr(10) + "\n");
  try {
    pi::ingest(in);
    FAIL() << "expected MalformedRecord";
  } catch (const pi::MalformedRecord& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(e.reason().find("like"), std::string::npos);
  }
}

TEST(Ingest, RejectsBadValues) {
  auto parse = [](std::string s) {
    std::istringstream in(s);
    return pi::ingest(in);
  };
  std::string neg = kRecord;
  neg.replace(neg.find(R"("sad":0)"), 7, R"("sad":-1)");
  EXPECT_THROW(parse(neg), pi::MalformedRecord);
  std::string kind = kRecord;
  kind.replace(kind.find("video"), 5, "gif");
  EXPECT_THROW(parse(kind), pi::MalformedRecord);
  std::string date = kRecord;
  date.replace(date.find("2017-03-14"), 10, "2017-02-30");
  EXPECT_THROW(parse(date), pi::MalformedRecord);
  EXPECT_THROW(parse("{not json"), pi::MalformedRecord);
  EXPECT_THROW(parse("[1,2]"), pi::MalformedRecord);
}

TEST(Ingest, DuplicateIdRejected) {
  std::istringstream in(std::string(kRecord) + "\n\n" + kRecord + "\n");
  try {
    pi::ingest(in);
    FAIL() << "expected DuplicateId";
  } catch (const pi::DuplicateId& e) {
    EXPECT_EQ(e.id(), "1");
  }
}

TEST(Ingest, LabeledFilesKeepTheirLabels) {
  const auto labeled = pi::label({make_post("a", "x", likes(10, 1)), make_post("b", "y", likes(1, 1))});
  std::ostringstream out;
  pi::write_corpus(out, labeled);
  std::istringstream in(out.str());
  const auto file = pi::read_corpus(in);
  ASSERT_TRUE(file.labeled);
  ASSERT_EQ(file.labeled->size(), 2u);
  EXPECT_EQ((*file.labeled)[0].labels, labeled[0].labels);
  EXPECT_EQ((*file.labeled)[1].labels, labeled[1].labels);

  std::istringstream plain(kRecord);
  EXPECT_FALSE(pi::read_corpus(plain).labeled);
}

// ---------------------------------------------------------------------------
// filter

TEST(Filter, RemovalRules) {
  const auto no_text = make_post("a", "", likes(45, 5));
  const auto only_like = make_post("b", "hola", likes(5));
  const auto kept = make_post("c", "hola", likes(5, 1));
  const auto blank = make_post("d", " \t　\n", likes(5, 1));
  const auto silent = make_post("e", "hola", {});
  EXPECT_EQ(pi::removal_reason(no_text), pi::RemovalReason::NoText);
  EXPECT_EQ(pi::removal_reason(only_like), pi::RemovalReason::OnlyLike);
  EXPECT_EQ(pi::removal_reason(kept), std::nullopt);
  EXPECT_EQ(pi::removal_reason(blank), pi::RemovalReason::NoText);
  EXPECT_EQ(pi::removal_reason(silent), pi::RemovalReason::NoReactions);

  const auto r = pi::filter({no_text, only_like, kept, blank, silent, make_post("f", "adiós", {0, 0, 0, 1, 0, 0})});
  ASSERT_EQ(r.kept.size(), 2u);
  EXPECT_EQ(r.kept[0].id, "c");
  EXPECT_EQ(r.kept[1].id, "f");
  EXPECT_EQ(r.removed.size(), 4u);
}

TEST(Filter, IdempotentOnRandomCorpora) {
  pi::Rng rng(11);
  for (int round = 0; round < 50; ++round) {
    std::vector<pi::Post> posts;
    for (std::size_t i = 0; i < 60; ++i) {
      auto p = testing_support::random_post(rng, i);
      if (rng.below(4) == 0) p.reactions = likes(rng.below(3));
      posts.push_back(p);
    }
    const auto once = pi::filter(posts);
    EXPECT_EQ(once.kept.size() + once.removed.size(), posts.size());
    const auto twice = pi::filter(once.kept);
    EXPECT_TRUE(twice.removed.empty());
    EXPECT_EQ(twice.kept, once.kept);
  }
}

// ---------------------------------------------------------------------------
// label

TEST(Label, StrictlyAboveTheMean) {
  const auto labeled = pi::label(posts_with_total({10, 2, 4, 0}));
  std::vector<pi::Impact> got;
  for (const auto& lp : labeled) got.push_back(lp.label(pi::ProblemKind::TotalReactions));
  EXPECT_EQ(got, (std::vector<pi::Impact>{pi::Impact::High, pi::Impact::Low, pi::Impact::Low, pi::Impact::Low}));
}

TEST(Label, SinglePostIsLowEverywhere) {
  const auto labeled = pi::label({make_post("a", "x", pi::ReactionCounts{3, 4, 5, 6, 7, 8}, 9, 10)});
  for (pi::ProblemKind k : pi::kAllProblems) EXPECT_EQ(labeled[0].label(k), pi::Impact::Low);
}

TEST(Label, EmptyCorpusRejected) { EXPECT_THROW(pi::label({}), pi::EmptyCorpus); }

TEST(Label, ExactComparisonOnHugeCounts) {
  // Floating-point means would round these to equality.
  const std::uint64_t big = (1ULL << 60) + 1;
  const auto labeled = pi::label(posts_with_total({big, big - 1}));
  EXPECT_EQ(labeled[0].label(pi::ProblemKind::TotalReactions), pi::Impact::High);
  EXPECT_EQ(labeled[1].label(pi::ProblemKind::TotalReactions), pi::Impact::Low);
}

TEST(Label, PropertiesOnRandomCorpora) {
  pi::Rng rng(5);
  for (int round = 0; round < 100; ++round) {
    std::vector<pi::Post> posts;
    const auto n = 1 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) posts.push_back(testing_support::random_post(rng, i));
    const auto labeled = pi::label(posts);
    ASSERT_EQ(labeled.size(), posts.size());

    // Oracle: mean as a rational compared exactly via long double on small counts.
    for (pi::ProblemKind k : pi::kAllProblems) {
      long double sum = 0;
      for (const auto& p : posts) sum += static_cast<long double>(pi::metric(p, k));
      const long double mean = sum / static_cast<long double>(posts.size());
      std::size_t high = 0;
      for (std::size_t i = 0; i < posts.size(); ++i) {
        const bool expect_high = static_cast<long double>(pi::metric(posts[i], k)) > mean;
        EXPECT_EQ(labeled[i].label(k) == pi::Impact::High, expect_high);
        high += expect_high;
      }
      EXPECT_LE(high, posts.size());
    }

    // Scaling every metric by a constant leaves labels unchanged.
    const std::uint64_t c = 1 + rng.below(1000);
    auto scaled = posts;
    for (auto& p : scaled) {
      p.reactions = {p.reactions.like * c, p.reactions.love * c, p.reactions.haha * c,
                     p.reactions.wow * c,  p.reactions.sad * c,  p.reactions.angry * c};
      p.comments *= c;
      p.shares *= c;
    }
    const auto relabeled = pi::label(scaled);
    for (std::size_t i = 0; i < posts.size(); ++i) EXPECT_EQ(relabeled[i].labels, labeled[i].labels);
  }
}

TEST(Label, IdenticalMetricsAreAllLow) {
  std::vector<pi::Post> posts;
  for (int i = 0; i < 7; ++i) posts.push_back(make_post("p" + std::to_string(i), "x", pi::ReactionCounts{3, 1, 1, 1, 1, 1}, 2, 2));
  for (const auto& lp : pi::label(posts))
    for (pi::ProblemKind k : pi::kAllProblems) EXPECT_EQ(lp.label(k), pi::Impact::Low);
}

// ---------------------------------------------------------------------------
// stats

namespace {
pi::TokenStream stats_tokens(std::string_view t) { return pi::tokenize(pi::normalize(t)); }
}  // namespace

TEST(Stats, RepeatedTokenGivesOneThird) {
  const auto s = pi::compute_stats({make_post("a", "a a a", likes(1, 1))}, stats_tokens);
  ASSERT_EQ(s.brands.size(), 1u);
  EXPECT_EQ(s.brands[0].token_count, 3u);
  EXPECT_EQ(s.brands[0].vocabulary_size, 1u);
  EXPECT_DOUBLE_EQ(s.brands[0].lexical_richness, 1.0 / 3.0);
}

TEST(Stats, DistinctTokensGiveOne) {
  const auto s = pi::compute_stats({make_post("a", "uno dos tres cuatro", likes(1, 1))}, stats_tokens);
  EXPECT_DOUBLE_EQ(s.brands[0].lexical_richness, 1.0);
}

TEST(Stats, PerBrandAveragesWithPopulationStd) {
  const auto s = pi::compute_stats({make_post("a", "uno dos", {}, 0, 0, "B"), make_post("b", "uno dos tres cuatro", {}, 0, 0, "B"),
                                    make_post("c", "ñ", {}, 0, 0, "A")},
                                   stats_tokens);
  ASSERT_EQ(s.brands.size(), 2u);
  EXPECT_EQ(s.brands[0].brand, "A");
  EXPECT_EQ(s.brands[0].chars_per_post.mean, 1.0);
  const auto& b = s.brands[1];
  EXPECT_EQ(b.posts, 2u);
  EXPECT_EQ(b.token_count, 6u);
  EXPECT_EQ(b.vocabulary_size, 4u);
  EXPECT_DOUBLE_EQ(b.tokens_per_post.mean, 3.0);
  EXPECT_DOUBLE_EQ(b.tokens_per_post.stddev, 1.0);
  EXPECT_DOUBLE_EQ(b.chars_per_post.mean, (7.0 + 19.0) / 2.0);
}

TEST(Stats, EmptyBrandRejected) {
  EXPECT_THROW(pi::compute_brand_stats("X", {}, stats_tokens), pi::EmptyBrand);
}

TEST(Stats, RichnessInUnitIntervalOnRandomCorpora) {
  pi::Rng rng(3);
  for (int round = 0; round < 100; ++round) {
    std::vector<pi::Post> posts;
    for (std::size_t i = 0; i < 20; ++i) posts.push_back(testing_support::random_post(rng, i));
    for (const auto& b : pi::compute_stats(posts, stats_tokens).brands) {
      if (b.token_count == 0) continue;
      EXPECT_GT(b.lexical_richness, 0.0);
      EXPECT_LE(b.lexical_richness, 1.0);
      EXPECT_DOUBLE_EQ(b.lexical_richness, static_cast<double>(b.vocabulary_size) / static_cast<double>(b.token_count));
    }
  }
}
