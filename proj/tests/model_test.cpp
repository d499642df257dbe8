#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "test_support.hpp"

namespace pi = postimpact;

namespace {

std::string serialize(const pi::Model& m) {
  std::ostringstream out;
  pi::write_model(out, m);
  return out.str();
}

pi::Model deserialize(const std::string& bytes) {
  std::istringstream in(bytes);
  return pi::read_model(in);
}

pi::LabeledPost labeled(std::string id, std::string text, pi::Impact shares) {
  pi::LabeledPost lp;
  lp.post = testing_support::make_post(std::move(id), std::move(text), testing_support::likes(1, 1));
  lp.labels.fill(pi::Impact::Low);
  lp.labels[pi::index_of(pi::ProblemKind::Shares)] = shares;
  return lp;
}

const std::vector<pi::LabeledPost>& training_data() {
  static const auto data = testing_support::synthetic_labeled(400, 17);
  return data;
}

}  // namespace

TEST(ModelFile, RoundTripPreservesPredictions) {
  pi::Rng rng(1);
  std::vector<pi::Post> probes;
  for (std::size_t i = 0; i < 100; ++i) probes.push_back(testing_support::random_post(rng, i));
  for (pi::LearnerKind kind : pi::kAllLearners) {
    for (const char* cfg : {"c", "b+s+i+t", "all"}) {
      const auto m = pi::train(kind, pi::ProblemKind::TotalReactions, *pi::parse_feature_config(cfg, 200),
                               training_data());
      const auto back = deserialize(serialize(m));
      EXPECT_EQ(back.kind, m.kind);
      EXPECT_EQ(back.problem, m.problem);
      EXPECT_EQ(back.version, m.version);
      EXPECT_EQ(pi::model_checksum(back), pi::model_checksum(m));
      EXPECT_EQ(serialize(back), serialize(m));
      for (const auto& p : probes) ASSERT_EQ(pi::predict(back, p), pi::predict(m, p)) << cfg;
      for (int i = 0; i < 100; ++i) {
        std::vector<double> v(m.dim());
        for (auto& x : v) x = rng.uniform() < 0.1 ? rng.uniform() : 0.0;
        const auto fv = pi::FeatureVector::from_dense(v);
        ASSERT_EQ(pi::predict(back, fv), pi::predict(m, fv));
      }
    }
  }
}

TEST(ModelFile, SaveAndLoadThroughDisk) {
  testing_support::TempDir dir;
  const auto m = pi::train(pi::LearnerKind::NaiveBayes, pi::ProblemKind::Comments, *pi::parse_feature_config("c+b"),
                           training_data());
  pi::save(m, dir / "nb.model");
  EXPECT_EQ(pi::load(dir / "nb.model").version, m.version);
  EXPECT_THROW(pi::load(dir / "absent.model"), pi::CorruptModelFile);
  EXPECT_THROW(pi::save(m, dir / "no-such-dir" / "nb.model"), pi::UnwritablePath);
}

TEST(ModelFile, TruncatedFileIsCorrupt) {
  const auto bytes = serialize(pi::train(pi::LearnerKind::DecisionTree, pi::ProblemKind::Shares,
                                         *pi::parse_feature_config("b+s"), training_data()));
  for (std::size_t keep : {std::size_t{0}, std::size_t{10}, bytes.find('\n') + 1, bytes.size() / 2, bytes.size() - 1})
    EXPECT_THROW(deserialize(bytes.substr(0, keep)), pi::CorruptModelFile) << keep;
}

TEST(ModelFile, FlippedPayloadByteIsCorrupt) {
  auto bytes = serialize(pi::train(pi::LearnerKind::KNN, pi::ProblemKind::Shares, *pi::parse_feature_config("s"),
                                   training_data()));
  bytes[bytes.size() - 5] ^= 0x21;
  EXPECT_THROW(deserialize(bytes), pi::CorruptModelFile);
  EXPECT_THROW(deserialize("not a model\n"), pi::CorruptModelFile);
}

TEST(ModelFile, BumpedFormatVersionIsRejected) {
  auto bytes = serialize(pi::train(pi::LearnerKind::LinearSVM, pi::ProblemKind::Shares,
                                   *pi::parse_feature_config("b"), training_data()));
  const std::string header = std::string(pi::kModelMagic) + " " + std::to_string(pi::kModelFormatVersion);
  ASSERT_EQ(bytes.rfind(header, 0), 0u);
  bytes.replace(0, header.size(), std::string(pi::kModelMagic) + " " + std::to_string(pi::kModelFormatVersion + 1));
  EXPECT_THROW(deserialize(bytes), pi::VersionMismatch);
}

TEST(ModelFile, VersionTagTracksParameters) {
  pi::TrainOptions a, b;
  b.nb_alpha = 0.5;
  const auto cfg = *pi::parse_feature_config("c");
  const auto ma = pi::train(pi::LearnerKind::NaiveBayes, pi::ProblemKind::Shares, cfg, training_data(), a);
  const auto mb = pi::train(pi::LearnerKind::NaiveBayes, pi::ProblemKind::Shares, cfg, training_data(), b);
  EXPECT_NE(ma.version, mb.version);
  EXPECT_NE(pi::model_checksum(ma), pi::model_checksum(mb));
}

TEST(Explain, OneSidedTokenRanksFirst) {
  std::vector<pi::LabeledPost> posts;
  for (int i = 0; i < 10; ++i) {
    posts.push_back(labeled("h" + std::to_string(i), "promo hoy gratis", pi::Impact::High));
    posts.push_back(labeled("l" + std::to_string(i), "promo hoy curso", pi::Impact::Low));
  }
  const auto m = pi::train(pi::LearnerKind::NaiveBayes, pi::ProblemKind::Shares, *pi::parse_feature_config("c"), posts);
  const auto e = pi::explain(m, 2);
  ASSERT_EQ(e.low.size(), 2u);
  EXPECT_EQ(e.low[0].token, "curso");
  EXPECT_LT(e.low[0].log_odds, 0.0);
  EXPECT_EQ(e.high[0].token, "gratis");
  EXPECT_GT(e.high[0].log_odds, 0.0);
}

TEST(Explain, UniformTokensHaveZeroLogOdds) {
  std::vector<pi::LabeledPost> posts;
  for (int i = 0; i < 6; ++i)
    posts.push_back(labeled(std::to_string(i), "uno dos tres", i % 2 ? pi::Impact::High : pi::Impact::Low));
  const auto m = pi::train(pi::LearnerKind::NaiveBayes, pi::ProblemKind::Shares, *pi::parse_feature_config("c"), posts);
  for (const auto& t : pi::explain(m).high) EXPECT_NEAR(t.log_odds, 0.0, 1e-12);
}

TEST(Explain, RequiresNaiveBayesWithContent) {
  const auto dt = pi::train(pi::LearnerKind::DecisionTree, pi::ProblemKind::Shares, *pi::parse_feature_config("c"),
                            training_data());
  EXPECT_THROW(pi::explain(dt), pi::NotSupported);
  const auto nb = pi::train(pi::LearnerKind::NaiveBayes, pi::ProblemKind::Shares, *pi::parse_feature_config("b+s"),
                            training_data());
  EXPECT_THROW(pi::explain(nb), pi::NotSupported);
}
