#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "postimpact/server.hpp"
#include "test_support.hpp"

namespace pi = postimpact;

namespace {

const std::vector<pi::LabeledPost>& corpus() {
  static const auto data = testing_support::synthetic_labeled(300, 23);
  return data;
}

pi::Bundle make_bundle(pi::LearnerKind kind, const char* config, pi::TrainOptions opt = {}) {
  std::array<pi::Model, 6> models;
  for (pi::ProblemKind k : pi::kAllProblems)
    models[pi::index_of(k)] = pi::train(kind, k, *pi::parse_feature_config(config, 300), corpus(), opt);
  return pi::Bundle(std::move(models));
}

const pi::Bundle& shared_bundle() {
  static const auto b = make_bundle(pi::LearnerKind::NaiveBayes, "c+b+s+i+t");
  return b;
}

pi::DraftPost draft(std::string text) {
  pi::DraftPost d;
  d.text = std::move(text);
  d.link_kind = pi::LinkKind::Image;
  d.published_at = *pi::parse_iso8601("2017-03-14T13:00:00");
  return d;
}

constexpr const char* kRequest =
    R"({"text":"Gracias a todos! #comparte 😀 www.ej.mx","link_kind":"video","published_at":"2017-04-02T19:30:00"})";

}  // namespace

TEST(Forecast, SixPredictionsWithFeatureEcho) {
  const auto f = pi::forecast(draft("GENIAL gracias @amigos 😀"), shared_bundle());
  for (pi::ProblemKind k : pi::kAllProblems) {
    EXPECT_GE(f[k].score, 0.0);
    EXPECT_LE(f[k].score, 1.0);
    EXPECT_EQ(f.model_versions[pi::index_of(k)], shared_bundle().model(k).version);
  }
  EXPECT_EQ(f.behavioral, (std::array<double, 4>{1, 0, 1, 0}));
  EXPECT_EQ(f.style[0], 4.0);
  const auto j = pi::to_json(f);
  EXPECT_EQ(j["predictions"].size(), 6u);
  EXPECT_EQ(j["model_versions"].size(), 6u);
  EXPECT_EQ(j["published_at"], "2017-03-14T13:00:00");
}

TEST(Forecast, EmptyDraftIsRejected) {
  EXPECT_THROW(pi::forecast(draft(""), shared_bundle()), pi::EmptyDraft);
  EXPECT_THROW(pi::forecast(draft(" \t\n "), shared_bundle()), pi::EmptyDraft);
}

TEST(Forecast, MissingTimeUsesRequestTime) {
  auto d = draft("hola");
  d.published_at.reset();
  const auto f = pi::forecast(d, shared_bundle());
  EXPECT_GE(f.published_at.year, 2024);
}

TEST(Forecast, NearestNeighbourEchoesTrainingLabels) {
  pi::TrainOptions opt;
  opt.knn_k = 1;
  const auto bundle = make_bundle(pi::LearnerKind::KNN, "c+b+s+i+t", opt);
  for (std::size_t i = 0; i < 40; ++i) {
    const auto& lp = corpus()[i];
    pi::DraftPost d{lp.post.text, lp.post.link_kind, lp.post.published_at};
    const auto f = pi::forecast(d, bundle);
    for (pi::ProblemKind k : pi::kAllProblems) {
      EXPECT_EQ(f[k].label, lp.label(k)) << lp.post.id << " " << pi::to_string(k);
      EXPECT_TRUE(f[k].score == 0.0 || f[k].score == 1.0);
    }
  }
}

TEST(Bundle, SaveLoadRoundTrip) {
  testing_support::TempDir dir;
  shared_bundle().save(dir.path(), {{"corpus", "synthetic"}});
  const auto loaded = pi::Bundle::load(dir.path());
  EXPECT_EQ(loaded.checksums(), shared_bundle().checksums());
  const auto a = pi::to_json(pi::forecast(draft("curso de verano 2x1"), shared_bundle())).dump();
  const auto b = pi::to_json(pi::forecast(draft("curso de verano 2x1"), loaded)).dump();
  EXPECT_EQ(a, b);
}

TEST(Bundle, MissingModelIsNamed) {
  testing_support::TempDir dir;
  shared_bundle().save(dir.path());
  std::filesystem::remove(dir.path() / "shares.model");
  try {
    pi::Bundle::load(dir.path());
    FAIL() << "expected ModelMissing";
  } catch (const pi::ModelMissing& e) {
    EXPECT_NE(std::string(e.what()).find("shares"), std::string::npos);
  }
}

TEST(Bundle, SlotsMustMatchProblems) {
  auto models = shared_bundle().models();
  std::swap(models[0], models[1]);
  EXPECT_THROW(pi::Bundle(std::move(models)), pi::Error);
}

TEST(Handlers, PredictAndHealth) {
  const auto r = pi::handle_predict(shared_bundle(), kRequest);
  ASSERT_EQ(r.status, 200) << r.body;
  const auto j = nlohmann::json::parse(r.body);
  EXPECT_EQ(j["predictions"].size(), 6u);
  EXPECT_EQ(j["features"]["behavioral"]["urls"], 1.0);
  EXPECT_EQ(pi::handle_predict(shared_bundle(), kRequest).body, r.body);

  EXPECT_EQ(pi::handle_predict(shared_bundle(), "{").status, 400);
  EXPECT_EQ(pi::handle_predict(shared_bundle(), R"({"text":5})").status, 400);
  EXPECT_EQ(pi::handle_predict(shared_bundle(), R"({"text":"x","link_kind":"hologram"})").status, 400);
  EXPECT_EQ(pi::handle_predict(shared_bundle(), R"({"text":"x","published_at":"ayer"})").status, 400);
  EXPECT_EQ(pi::handle_predict(shared_bundle(), R"({"text":"   "})").status, 422);

  const auto h = pi::handle_health(shared_bundle());
  EXPECT_EQ(h.status, 200);
  const auto hj = nlohmann::json::parse(h.body);
  EXPECT_EQ(hj["status"], "ok");
  EXPECT_EQ(hj["model_versions"].size(), 6u);
}

TEST(Service, ServesConcurrentRequestsOverHttp) {
  auto bundle = std::make_shared<const pi::Bundle>(shared_bundle());
  const auto before = bundle->checksums();
  pi::ServiceOptions opt;
  opt.port = 0;
  opt.worker_threads = 4;
  pi::Service service(bundle, opt);
  const int port = service.start();
  ASSERT_GT(port, 0);

  httplib::Client health("127.0.0.1", port);
  const auto h = health.Get("/health");
  ASSERT_TRUE(h);
  EXPECT_EQ(h->status, 200);

  const std::string expected = pi::handle_predict(*bundle, kRequest).body;
  std::atomic<int> mismatches{0}, failures{0};
  std::vector<std::thread> clients;
  for (int t = 0; t < 4; ++t) {
    clients.emplace_back([&] {
      httplib::Client c("127.0.0.1", port);
      for (int i = 0; i < 50; ++i) {
        const auto res = c.Post("/predict", kRequest, "application/json");
        if (!res || res->status != 200) {
          ++failures;
          continue;
        }
        if (res->body != expected) ++mismatches;
      }
    });
  }
  for (auto& c : clients) c.join();
  EXPECT_EQ(failures.load(), 0);
  EXPECT_EQ(mismatches.load(), 0);

  const auto bad = health.Post("/predict", "not json", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  service.stop();
  EXPECT_EQ(bundle->checksums(), before);
}

TEST(Service, BusyPortIsReported) {
  auto bundle = std::make_shared<const pi::Bundle>(shared_bundle());
  pi::ServiceOptions opt;
  opt.port = 0;
  pi::Service first(bundle, opt);
  const int port = first.start();
  opt.port = port;
  pi::Service second(bundle, opt);
  EXPECT_THROW(second.bind(), pi::BindFailure);
}
