#pragma once

// A trained classifier bound to its feature pipeline: training, prediction,
// interpretation and the versioned model file.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "errors.hpp"
#include "features.hpp"
#include "learners/common.hpp"
#include "learners/decision_tree.hpp"
#include "learners/knn.hpp"
#include "learners/linear_svm.hpp"
#include "learners/naive_bayes.hpp"

namespace postimpact {

enum class LearnerKind { NaiveBayes, DecisionTree, LinearSVM, KNN };

inline constexpr std::array<LearnerKind, 4> kAllLearners = {LearnerKind::NaiveBayes, LearnerKind::DecisionTree,
                                                           LearnerKind::LinearSVM, LearnerKind::KNN};

inline std::string_view to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::NaiveBayes: return "nb";
    case LearnerKind::DecisionTree: return "dt";
    case LearnerKind::LinearSVM: return "svm";
    case LearnerKind::KNN: return "knn";
  }
  return "";
}

inline std::optional<LearnerKind> parse_learner(std::string_view s) {
  for (LearnerKind k : kAllLearners)
    if (s == to_string(k)) return k;
  if (s == "naive_bayes" || s == "naivebayes") return LearnerKind::NaiveBayes;
  if (s == "decision_tree" || s == "tree") return LearnerKind::DecisionTree;
  if (s == "linear_svm" || s == "pegasos") return LearnerKind::LinearSVM;
  if (s == "k-nn" || s == "nn") return LearnerKind::KNN;
  return std::nullopt;
}

using LearnerParams = std::variant<NaiveBayesModel, DecisionTreeModel, LinearSvmModel, KnnModel>;

inline constexpr int kModelFormatVersion = 1;
inline constexpr std::string_view kModelMagic = "POSTIMPACT-MODEL";

struct Model {
  LearnerKind kind = LearnerKind::NaiveBayes;
  ProblemKind problem = ProblemKind::TotalReactions;
  FeaturePipeline pipeline;
  LearnerParams params;
  TrainOptions options;
  /// "<format>:<payload checksum>", assigned by train/load.
  std::string version;

  std::size_t dim() const { return pipeline.dim(); }
};

inline LearnerParams train_learner(LearnerKind kind, std::span<const FeatureVector> xs, std::span<const Impact> ys,
                                   const TrainOptions& opt = {}) {
  switch (kind) {
    case LearnerKind::NaiveBayes: return train_naive_bayes(xs, ys, opt);
    case LearnerKind::DecisionTree: return train_decision_tree(xs, ys, opt);
    case LearnerKind::LinearSVM: return train_linear_svm(xs, ys, opt);
    case LearnerKind::KNN: return train_knn(xs, ys, opt);
  }
  throw Error("unknown learner");
}

inline Prediction predict(const LearnerParams& params, const FeatureVector& x) {
  return std::visit([&](const auto& m) { return m.predict(x); }, params);
}

inline Prediction predict(const Model& model, const FeatureVector& x) {
  check_dim(model.dim(), x);
  return predict(model.params, x);
}

/// Runs the full pipeline: raw vector, normalization, learner.
inline Prediction predict(const Model& model, const PostAnalysis& analysis) {
  return predict(model.params, model.pipeline.transform(analysis));
}

inline Prediction predict(const Model& model, const Post& post) { return predict(model, analyze(post)); }

// ---------------------------------------------------------------------------
// Serialization

namespace model_io {

using json = nlohmann::json;

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline json vector_to_json(const FeatureVector& v) {
  std::vector<std::uint32_t> idx;
  std::vector<double> val;
  idx.reserve(v.entries.size());
  val.reserve(v.entries.size());
  for (const auto& e : v.entries) {
    idx.push_back(e.index);
    val.push_back(e.value);
  }
  return json{{"dim", v.dim}, {"idx", idx}, {"val", val}};
}

inline FeatureVector vector_from_json(const json& j) {
  FeatureVector v;
  v.dim = j.at("dim").get<std::size_t>();
  const auto idx = j.at("idx").get<std::vector<std::uint32_t>>();
  const auto val = j.at("val").get<std::vector<double>>();
  if (idx.size() != val.size()) throw CorruptModelFile("sparse vector length mismatch");
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= v.dim || (i > 0 && idx[i] <= idx[i - 1])) throw CorruptModelFile("invalid sparse vector index");
    v.entries.push_back({idx[i], val[i]});
  }
  return v;
}

inline json pipeline_to_json(const FeaturePipeline& p) {
  json j;
  j["config"] = p.config.name();
  j["vocab_size_cap"] = p.config.vocab_size_cap;
  if (p.vocabulary) j["vocabulary"] = {{"tokens", p.vocabulary->tokens()}, {"frequencies", p.vocabulary->frequencies()}};
  if (p.time_profile) {
    std::vector<std::pair<int, double>> years(p.time_profile->year.begin(), p.time_profile->year.end());
    j["time_profile"] = {{"hour", p.time_profile->hour},
                         {"weekday", p.time_profile->weekday},
                         {"month", p.time_profile->month},
                         {"year", years}};
  }
  j["normalizer"] = {{"min", p.normalizer.min}, {"max", p.normalizer.max}};
  return j;
}

inline FeaturePipeline pipeline_from_json(const json& j) {
  FeaturePipeline p;
  const auto cfg = parse_feature_config(j.at("config").get<std::string>(), j.at("vocab_size_cap").get<std::size_t>());
  if (!cfg) throw CorruptModelFile("invalid feature config");
  p.config = *cfg;
  if (j.contains("vocabulary")) {
    p.vocabulary = Vocabulary(j["vocabulary"].at("tokens").get<std::vector<std::string>>(),
                              j["vocabulary"].at("frequencies").get<std::vector<std::uint64_t>>());
  }
  if (j.contains("time_profile")) {
    TimeProfile t;
    const auto& tj = j["time_profile"];
    t.hour = tj.at("hour").get<std::array<double, 24>>();
    t.weekday = tj.at("weekday").get<std::array<double, 7>>();
    t.month = tj.at("month").get<std::array<double, 12>>();
    for (const auto& [y, f] : tj.at("year").get<std::vector<std::pair<int, double>>>()) t.year[y] = f;
    p.time_profile = t;
  }
  p.normalizer.min = j.at("normalizer").at("min").get<std::vector<double>>();
  p.normalizer.max = j.at("normalizer").at("max").get<std::vector<double>>();
  if (p.normalizer.min.size() != p.normalizer.max.size()) throw CorruptModelFile("normalizer size mismatch");
  if (p.config.has(FeatureBlock::Content) && !p.vocabulary) throw CorruptModelFile("content model without vocabulary");
  if (p.config.has(FeatureBlock::Time) && !p.time_profile) throw CorruptModelFile("time model without time profile");
  if (dimensionality(p.config, p.vocabulary ? p.vocabulary->size() : 0) != p.normalizer.dim())
    throw CorruptModelFile("pipeline dimensionality mismatch");
  return p;
}

inline json params_to_json(const LearnerParams& params) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NaiveBayesModel>) {
          return {{"dim", m.dim},
                  {"alpha", m.alpha},
                  {"log_prior", m.log_prior},
                  {"log_likelihood_low", m.log_likelihood[0]},
                  {"log_likelihood_high", m.log_likelihood[1]}};
        } else if constexpr (std::is_same_v<T, DecisionTreeModel>) {
          json nodes = json::array();
          for (const auto& n : m.nodes)
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.high_fraction, n.samples});
          return {{"dim", m.dim}, {"nodes", nodes}};
        } else if constexpr (std::is_same_v<T, LinearSvmModel>) {
          return {{"weights", m.weights},
                  {"bias", m.bias},
                  {"lambda", m.lambda},
                  {"objective_history", m.objective_history},
                  {"iterate_objective_history", m.iterate_objective_history}};
        } else {
          json examples = json::array();
          for (const auto& v : m.examples()) examples.push_back(vector_to_json(v));
          std::vector<int> labels;
          for (Impact y : m.labels()) labels.push_back(static_cast<int>(y));
          return {{"dim", m.dim()}, {"k", m.k()}, {"examples", examples}, {"labels", labels}, {"weights", m.weights()}};
        }
      },
      params);
}

inline LearnerParams params_from_json(LearnerKind kind, const json& j) {
  switch (kind) {
    case LearnerKind::NaiveBayes: {
      NaiveBayesModel m;
      m.dim = j.at("dim").get<std::size_t>();
      m.alpha = j.at("alpha").get<double>();
      m.log_prior = j.at("log_prior").get<std::array<double, 2>>();
      m.log_likelihood[0] = j.at("log_likelihood_low").get<std::vector<double>>();
      m.log_likelihood[1] = j.at("log_likelihood_high").get<std::vector<double>>();
      if (m.log_likelihood[0].size() != m.dim || m.log_likelihood[1].size() != m.dim)
        throw CorruptModelFile("naive Bayes parameter size mismatch");
      return m;
    }
    case LearnerKind::DecisionTree: {
      DecisionTreeModel m;
      m.dim = j.at("dim").get<std::size_t>();
      for (const auto& n : j.at("nodes")) {
        TreeNode t;
        t.feature = n.at(0).get<std::int32_t>();
        t.threshold = n.at(1).get<double>();
        t.left = n.at(2).get<std::int32_t>();
        t.right = n.at(3).get<std::int32_t>();
        t.high_fraction = n.at(4).get<double>();
        t.samples = n.at(5).get<std::uint32_t>();
        m.nodes.push_back(t);
      }
      const auto count = static_cast<std::int32_t>(m.nodes.size());
      if (count == 0) throw CorruptModelFile("empty tree");
      for (std::int32_t i = 0; i < count; ++i) {
        const auto& n = m.nodes[static_cast<std::size_t>(i)];
        if (n.is_leaf()) continue;
        if (static_cast<std::size_t>(n.feature) >= m.dim || n.left <= i || n.right <= i || n.left >= count ||
            n.right >= count)
          throw CorruptModelFile("invalid tree node");
      }
      return m;
    }
    case LearnerKind::LinearSVM: {
      LinearSvmModel m;
      m.weights = j.at("weights").get<std::vector<double>>();
      m.bias = j.at("bias").get<double>();
      m.lambda = j.at("lambda").get<double>();
      m.objective_history = j.at("objective_history").get<std::vector<double>>();
      m.iterate_objective_history = j.at("iterate_objective_history").get<std::vector<double>>();
      return m;
    }
    case LearnerKind::KNN: {
      const auto dim = j.at("dim").get<std::size_t>();
      std::vector<FeatureVector> examples;
      for (const auto& e : j.at("examples")) {
        examples.push_back(vector_from_json(e));
        if (examples.back().dim != dim) throw CorruptModelFile("k-NN example dimension mismatch");
      }
      std::vector<Impact> labels;
      for (int y : j.at("labels").get<std::vector<int>>()) labels.push_back(y ? Impact::High : Impact::Low);
      auto weights = j.at("weights").get<std::vector<double>>();
      if (labels.size() != examples.size() || weights.size() != examples.size())
        throw CorruptModelFile("k-NN table size mismatch");
      return KnnModel(dim, j.at("k").get<std::size_t>(), std::move(examples), std::move(labels), std::move(weights));
    }
  }
  throw CorruptModelFile("unknown learner kind");
}

inline json options_to_json(const TrainOptions& o) {
  return {{"seed", o.seed},
          {"balanced_class_weights", o.balanced_class_weights},
          {"nb_alpha", o.nb_alpha},
          {"svm_lambda", o.svm_lambda},
          {"svm_epochs", o.svm_epochs},
          {"dt_max_depth", o.dt_max_depth},
          {"dt_min_samples_split", o.dt_min_samples_split},
          {"knn_k", o.knn_k}};
}

inline TrainOptions options_from_json(const json& j) {
  TrainOptions o;
  o.seed = j.at("seed").get<std::uint64_t>();
  o.balanced_class_weights = j.at("balanced_class_weights").get<bool>();
  o.nb_alpha = j.at("nb_alpha").get<double>();
  o.svm_lambda = j.at("svm_lambda").get<double>();
  o.svm_epochs = j.at("svm_epochs").get<std::size_t>();
  o.dt_max_depth = j.at("dt_max_depth").get<std::size_t>();
  o.dt_min_samples_split = j.at("dt_min_samples_split").get<std::size_t>();
  o.knn_k = j.at("knn_k").get<std::size_t>();
  return o;
}

/// CBOR encoding of everything but the version tag.
inline std::vector<std::uint8_t> encode_payload(const Model& m) {
  json j;
  j["learner"] = to_string(m.kind);
  j["problem"] = to_string(m.problem);
  j["pipeline"] = pipeline_to_json(m.pipeline);
  j["params"] = params_to_json(m.params);
  j["options"] = options_to_json(m.options);
  return json::to_cbor(j);
}

inline std::string version_tag(std::span<const std::uint8_t> payload) {
  const std::string_view bytes(reinterpret_cast<const char*>(payload.data()), payload.size());
  return std::to_string(kModelFormatVersion) + ":" + hex64(fnv1a64(bytes)).substr(0, 12);
}

}  // namespace model_io

/// Checksum of the model's stored parameters.
inline std::uint64_t model_checksum(const Model& m) {
  const auto payload = model_io::encode_payload(m);
  return model_io::fnv1a64(std::string_view(reinterpret_cast<const char*>(payload.data()), payload.size()));
}

inline void assign_version(Model& m) { m.version = model_io::version_tag(model_io::encode_payload(m)); }

/// Model file layout:
///   line 1: "POSTIMPACT-MODEL <format version>"
///   line 2: "<payload bytes> <fnv1a64 of payload, 16 hex digits>"
///   payload: CBOR map {learner, problem, pipeline, params, options}
inline void write_model(std::ostream& out, const Model& m) {
  const auto payload = model_io::encode_payload(m);
  const std::string_view bytes(reinterpret_cast<const char*>(payload.data()), payload.size());
  out << kModelMagic << ' ' << kModelFormatVersion << '\n'
      << payload.size() << ' ' << model_io::hex64(model_io::fnv1a64(bytes)) << '\n';
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline void save(const Model& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UnwritablePath(path.string());
  write_model(out, m);
  out.flush();
  if (!out) throw UnwritablePath(path.string());
}

inline Model read_model(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw CorruptModelFile("missing header");
  std::istringstream hs(header);
  std::string magic;
  int version = -1;
  hs >> magic >> version;
  if (magic != kModelMagic) throw CorruptModelFile("not a model file");
  if (version != kModelFormatVersion)
    throw VersionMismatch("model format version " + std::to_string(version) + ", expected " +
                          std::to_string(kModelFormatVersion));
  std::string sizes;
  if (!std::getline(in, sizes)) throw CorruptModelFile("missing payload header");
  std::istringstream ss(sizes);
  std::size_t size = 0;
  std::string checksum;
  if (!(ss >> size >> checksum)) throw CorruptModelFile("invalid payload header");
  std::vector<std::uint8_t> payload(size);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(size));
  if (static_cast<std::size_t>(in.gcount()) != size) throw CorruptModelFile("truncated payload");
  const std::string_view bytes(reinterpret_cast<const char*>(payload.data()), payload.size());
  if (model_io::hex64(model_io::fnv1a64(bytes)) != checksum) throw CorruptModelFile("payload checksum mismatch");

  Model m;
  try {
    const auto j = nlohmann::json::from_cbor(payload);
    const auto kind = parse_learner(j.at("learner").get<std::string>());
    const auto problem = parse_problem(j.at("problem").get<std::string>());
    if (!kind || !problem) throw CorruptModelFile("unknown learner or problem");
    m.kind = *kind;
    m.problem = *problem;
    m.pipeline = model_io::pipeline_from_json(j.at("pipeline"));
    m.params = model_io::params_from_json(m.kind, j.at("params"));
    m.options = model_io::options_from_json(j.at("options"));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptModelFile(std::string("invalid payload: ") + e.what());
  }
  const std::size_t learner_dim = std::visit(
      [](const auto& p) -> std::size_t {
        if constexpr (requires { p.dim(); }) return p.dim();
        else return p.dim;
      },
      m.params);
  if (learner_dim != m.pipeline.dim()) throw CorruptModelFile("learner/pipeline dimension mismatch");
  m.version = model_io::version_tag(payload);
  return m;
}

inline Model load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptModelFile("cannot open " + path.string());
  return read_model(in);
}

// ---------------------------------------------------------------------------
// Training entry points

/// Trains on already-normalized vectors. `pipeline` must produce vectors of
/// the same dimensionality.
inline Model train(LearnerKind kind, ProblemKind problem, std::span<const FeatureVector> vectors,
                   std::span<const Impact> labels, const TrainOptions& opt, FeaturePipeline pipeline) {
  Model m;
  m.kind = kind;
  m.problem = problem;
  m.options = opt;
  const std::size_t dim = validate_training(vectors, labels);
  if (pipeline.dim() != dim) throw DimensionMismatch(pipeline.dim(), dim);
  m.pipeline = std::move(pipeline);
  m.params = train_learner(kind, vectors, labels, opt);
  assign_version(m);
  return m;
}

/// Fits the feature pipeline on `posts` and trains one learner for `problem`.
inline Model train(LearnerKind kind, ProblemKind problem, const FeatureConfig& config,
                   std::span<const LabeledPost> posts, const TrainOptions& opt = {}) {
  std::vector<PostAnalysis> analyses;
  analyses.reserve(posts.size());
  for (const auto& p : posts) analyses.push_back(analyze(p.post));
  std::vector<const PostAnalysis*> ptrs;
  for (const auto& a : analyses) ptrs.push_back(&a);
  FeaturePipeline pipeline = fit_pipeline(config, ptrs);
  std::vector<FeatureVector> xs;
  std::vector<Impact> ys;
  xs.reserve(posts.size());
  ys.reserve(posts.size());
  for (std::size_t i = 0; i < posts.size(); ++i) {
    xs.push_back(pipeline.transform(analyses[i]));
    ys.push_back(posts[i].label(problem));
  }
  return train(kind, problem, xs, ys, opt, std::move(pipeline));
}

// ---------------------------------------------------------------------------
// Interpretation

struct TokenWeight {
  std::string token;
  double log_odds;  // log P(token|High) - log P(token|Low)
};

struct Explanation {
  std::vector<TokenWeight> high;  // most indicative of High first
  std::vector<TokenWeight> low;   // most indicative of Low first
};

/// Top-n content tokens by naive Bayes log-odds for each class.
inline Explanation explain(const Model& model, std::size_t top_n = 20) {
  const auto* nb = std::get_if<NaiveBayesModel>(&model.params);
  if (nb == nullptr) throw NotSupported("explain requires a naive Bayes model");
  if (!model.pipeline.config.has(FeatureBlock::Content) || !model.pipeline.vocabulary ||
      model.pipeline.vocabulary->empty())
    throw NotSupported("explain requires the content block");
  const auto& vocab = *model.pipeline.vocabulary;
  std::vector<TokenWeight> all;
  all.reserve(vocab.size());
  for (std::size_t d = 0; d < vocab.size(); ++d)
    all.push_back({vocab.token(d), nb->log_likelihood[1][d] - nb->log_likelihood[0][d]});
  Explanation out;
  const std::size_t n = std::min(top_n, all.size());
  auto by_high = all;
  std::stable_sort(by_high.begin(), by_high.end(), [](const auto& a, const auto& b) { return a.log_odds > b.log_odds; });
  out.high.assign(by_high.begin(), by_high.begin() + static_cast<std::ptrdiff_t>(n));
  auto by_low = std::move(all);
  std::stable_sort(by_low.begin(), by_low.end(), [](const auto& a, const auto& b) { return a.log_odds < b.log_odds; });
  out.low.assign(by_low.begin(), by_low.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

}  // namespace postimpact
