#pragma once

// Six-model bundles and draft scoring.

#include <array>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "errors.hpp"
#include "features.hpp"
#include "model.hpp"
#include "textprep.hpp"
#include "timestamp.hpp"
#include "unicode.hpp"

namespace postimpact {

struct DraftPost {
  std::string text;
  LinkKind link_kind = LinkKind::None;
  std::optional<Timestamp> published_at;  // request time when absent
};

struct ImpactForecast {
  std::array<Prediction, 6> predictions{};
  std::array<std::string, 6> model_versions;
  std::array<double, kStyleDims> style{};
  std::array<double, kBehavioralDims> behavioral{};
  Timestamp published_at;

  const Prediction& operator[](ProblemKind k) const { return predictions[index_of(k)]; }
};

/// One model per problem, loaded once and never modified afterwards.
class Bundle {
 public:
  static constexpr std::string_view kManifestName = "manifest.json";

  Bundle() = default;
  explicit Bundle(std::array<Model, 6> models) : models_(std::move(models)) {
    for (ProblemKind k : kAllProblems)
      if (models_[index_of(k)].problem != k) throw Error("bundle slot " + std::string(to_string(k)) + " holds a model for another problem");
  }

  const Model& model(ProblemKind k) const { return models_[index_of(k)]; }
  const std::array<Model, 6>& models() const { return models_; }

  /// Checksum of every model's in-memory parameters, in problem order.
  std::array<std::uint64_t, 6> checksums() const {
    std::array<std::uint64_t, 6> out{};
    for (std::size_t i = 0; i < 6; ++i) out[i] = model_checksum(models_[i]);
    return out;
  }

  /// Writes `<problem>.model` files plus a manifest naming them.
  void save(const std::filesystem::path& dir, const nlohmann::json& provenance = nlohmann::json::object()) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw UnwritablePath(dir.string());
    nlohmann::ordered_json manifest;
    manifest["format"] = kModelFormatVersion;
    manifest["models"] = nlohmann::ordered_json::object();
    for (const auto& m : models_) {
      const std::string file = std::string(to_string(m.problem)) + ".model";
      postimpact::save(m, dir / file);
      manifest["models"][std::string(to_string(m.problem))] = {{"file", file},
                                                               {"learner", to_string(m.kind)},
                                                               {"config", m.pipeline.config.name()},
                                                               {"version", m.version}};
    }
    manifest["provenance"] = provenance;
    std::ofstream out(dir / kManifestName, std::ios::trunc);
    if (!out) throw UnwritablePath((dir / kManifestName).string());
    out << manifest.dump(2) << '\n';
  }

  static Bundle load(const std::filesystem::path& dir) {
    std::ifstream in(dir / kManifestName);
    if (!in) throw Error("cannot open bundle manifest " + (dir / kManifestName).string());
    nlohmann::json manifest;
    try {
      manifest = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("bundle manifest is not valid JSON: ") + e.what());
    }
    const auto& entries = manifest.contains("models") ? manifest["models"] : nlohmann::json::object();
    std::array<Model, 6> models;
    for (ProblemKind k : kAllProblems) {
      const std::string key(to_string(k));
      if (!entries.contains(key)) throw ModelMissing(key);
      const auto file = dir / entries[key].at("file").get<std::string>();
      if (!std::filesystem::exists(file)) throw ModelMissing(key);
      Model m = postimpact::load(file);
      if (m.problem != k) throw CorruptModelFile(file.string() + " holds a model for " + std::string(to_string(m.problem)));
      models[index_of(k)] = std::move(m);
    }
    return Bundle(std::move(models));
  }

 private:
  std::array<Model, 6> models_;
};

/// Normalizes the draft once, then featurizes it through each model's own
/// pipeline and predicts. Deterministic given (draft, bundle) when
/// published_at is set.
inline ImpactForecast forecast(const DraftPost& draft, const Bundle& bundle) {
  if (unicode::trim(draft.text).empty()) throw EmptyDraft();
  ImpactForecast f;
  f.published_at = draft.published_at ? *draft.published_at : Timestamp::from_system(std::chrono::system_clock::now());
  const PostAnalysis a = analyze(draft.text, draft.link_kind, f.published_at);
  f.style = a.style;
  f.behavioral = a.behavioral;
  for (ProblemKind k : kAllProblems) {
    const Model& m = bundle.model(k);
    f.predictions[index_of(k)] = predict(m, a);
    f.model_versions[index_of(k)] = m.version;
  }
  return f;
}

inline DraftPost parse_draft(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("draft must be a JSON object");
  if (!j.contains("text") || !j["text"].is_string()) throw Error("draft.text must be a string");
  DraftPost d;
  d.text = j["text"].get<std::string>();
  if (j.contains("link_kind") && !j["link_kind"].is_null()) {
    if (!j["link_kind"].is_string()) throw Error("draft.link_kind must be a string");
    const auto k = parse_link_kind(j["link_kind"].get<std::string>());
    if (!k) throw Error("unknown link_kind '" + j["link_kind"].get<std::string>() + "'");
    d.link_kind = *k;
  }
  if (j.contains("published_at") && !j["published_at"].is_null()) {
    if (!j["published_at"].is_string()) throw Error("draft.published_at must be a string");
    const auto t = parse_iso8601(j["published_at"].get<std::string>());
    if (!t) throw Error("draft.published_at is not an ISO-8601 timestamp");
    d.published_at = *t;
  }
  return d;
}

inline nlohmann::ordered_json to_json(const ImpactForecast& f) {
  nlohmann::ordered_json j;
  j["predictions"] = nlohmann::ordered_json::object();
  j["model_versions"] = nlohmann::ordered_json::object();
  for (ProblemKind k : kAllProblems) {
    const auto& p = f[k];
    j["predictions"][std::string(to_string(k))] = {{"label", to_string(p.label)}, {"score", p.score}};
    j["model_versions"][std::string(to_string(k))] = f.model_versions[index_of(k)];
  }
  j["features"] = {{"style",
                    {{"words", f.style[0]}, {"uppercase", f.style[1]}, {"lowercase", f.style[2]}, {"digits", f.style[3]},
                     {"symbols", f.style[4]}}},
                   {"behavioral",
                    {{"emojis", f.behavioral[0]}, {"hashtags", f.behavioral[1]}, {"mentions", f.behavioral[2]},
                     {"urls", f.behavioral[3]}}}};
  j["published_at"] = f.published_at.to_iso();
  return j;
}

}  // namespace postimpact
