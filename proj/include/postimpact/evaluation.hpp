#pragma once

// Stratified k-fold cross-validation over problems x feature configs x
// learners, with per-class and macro F1.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "errors.hpp"
#include "features.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace postimpact {

// ---------------------------------------------------------------------------
// Plans

struct ExperimentPlan {
  std::vector<ProblemKind> problems;
  std::vector<FeatureConfig> configs;
  std::vector<LearnerKind> learners;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  TrainOptions options;
  /// Worker threads; 0 picks the hardware concurrency.
  std::size_t threads = 0;

  void validate() const {
    if (folds < 2) throw Error("plan needs at least 2 folds");
    if (problems.empty() || configs.empty() || learners.empty()) throw Error("plan lists must be non-empty");
  }
};

inline FeatureConfig config_of(std::string_view name, std::size_t vocab_cap = kDefaultVocabularyCap) {
  const auto c = parse_feature_config(name, vocab_cap);
  if (!c) throw Error("invalid feature config '" + std::string(name) + "'");
  return *c;
}

/// Single feature types and their metadata-inclusive combination.
inline std::vector<FeatureConfig> single_feature_configs() {
  return {config_of("b"), config_of("s"), config_of("i"), config_of("t"), config_of("b+s+i+t")};
}

/// Content alone and combined; interaction and time are only used in the
/// full combination.
inline std::vector<FeatureConfig> content_configs() {
  return {config_of("c"), config_of("c+b"), config_of("c+s"), config_of("c+b+s"), config_of("c+b+s+i+t")};
}

inline ExperimentPlan make_plan(std::vector<FeatureConfig> configs, std::size_t folds = 10, std::uint64_t seed = 0) {
  ExperimentPlan p;
  p.problems.assign(kAllProblems.begin(), kAllProblems.end());
  p.configs = std::move(configs);
  p.learners.assign(kAllLearners.begin(), kAllLearners.end());
  p.folds = folds;
  p.seed = seed;
  return p;
}

/// Plan file (JSON):
///   {"problems": ["R", ...] | "all", "configs": ["b", "c+b", ...] | "set1" | "set2" | "all",
///    "learners": ["nb", ...] | "all", "folds": 10, "seed": 0, "vocab_size_cap": 10000,
///    "threads": 0, "options": {...TrainOptions overrides...}}
inline ExperimentPlan parse_plan(const nlohmann::json& j) {
  ExperimentPlan p;
  const std::size_t cap = j.value("vocab_size_cap", kDefaultVocabularyCap);
  auto is_all = [](const nlohmann::json& v) { return v.is_string() && v.get<std::string>() == "all"; };

  const auto& probs = j.at("problems");
  if (is_all(probs)) {
    p.problems.assign(kAllProblems.begin(), kAllProblems.end());
  } else {
    for (const auto& s : probs) {
      const auto k = parse_problem(s.get<std::string>());
      if (!k) throw Error("unknown problem '" + s.get<std::string>() + "'");
      p.problems.push_back(*k);
    }
  }

  const auto& cfgs = j.at("configs");
  auto add_set = [&](std::vector<FeatureConfig> set) {
    for (auto& c : set) {
      c.vocab_size_cap = cap;
      p.configs.push_back(c);
    }
  };
  if (cfgs.is_string()) {
    const auto s = cfgs.get<std::string>();
    if (s == "set1") add_set(single_feature_configs());
    else if (s == "set2") add_set(content_configs());
    else if (s == "all") {
      add_set(single_feature_configs());
      add_set(content_configs());
    } else {
      throw Error("unknown config set '" + s + "'");
    }
  } else {
    for (const auto& s : cfgs) p.configs.push_back(config_of(s.get<std::string>(), cap));
  }

  const auto& learners = j.at("learners");
  if (is_all(learners)) {
    p.learners.assign(kAllLearners.begin(), kAllLearners.end());
  } else {
    for (const auto& s : learners) {
      const auto k = parse_learner(s.get<std::string>());
      if (!k) throw Error("unknown learner '" + s.get<std::string>() + "'");
      p.learners.push_back(*k);
    }
  }
  p.folds = j.value("folds", std::size_t{10});
  p.seed = j.value("seed", std::uint64_t{0});
  p.threads = j.value("threads", std::size_t{0});
  if (j.contains("options")) {
    const auto& o = j["options"];
    p.options.balanced_class_weights = o.value("balanced_class_weights", p.options.balanced_class_weights);
    p.options.nb_alpha = o.value("nb_alpha", p.options.nb_alpha);
    p.options.svm_lambda = o.value("svm_lambda", p.options.svm_lambda);
    p.options.svm_epochs = o.value("svm_epochs", p.options.svm_epochs);
    p.options.dt_max_depth = o.value("dt_max_depth", p.options.dt_max_depth);
    p.options.dt_min_samples_split = o.value("dt_min_samples_split", p.options.dt_min_samples_split);
    p.options.knn_k = o.value("knn_k", p.options.knn_k);
  }
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Folds

/// Stratified partition into k folds. Each class is shuffled with the seed and
/// the High-then-Low sequence is dealt round-robin, so fold sizes and per-fold
/// class counts each differ by at most one.
inline std::vector<std::vector<std::size_t>> split_folds(std::span<const LabeledPost> labeled, ProblemKind problem,
                                                         std::size_t k, std::uint64_t seed) {
  if (k < 2) throw TooFewInstances("need at least 2 folds");
  if (labeled.size() < k) throw TooFewInstances("fewer posts (" + std::to_string(labeled.size()) + ") than folds");
  std::vector<std::size_t> high, low;
  for (std::size_t i = 0; i < labeled.size(); ++i) (labeled[i].label(problem) == Impact::High ? high : low).push_back(i);
  if (high.empty() || low.empty()) throw TooFewInstances("both classes must be present");
  Rng rng(derive_seed(seed, 0xF01D, index_of(problem)));
  rng.shuffle(std::span<std::size_t>(high));
  rng.shuffle(std::span<std::size_t>(low));
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t j = 0;
  for (auto i : high) folds[j++ % k].push_back(i);
  for (auto i : low) folds[j++ % k].push_back(i);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

// ---------------------------------------------------------------------------
// Metrics

/// Confusion counts with High as the positive class.
struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  void add(Impact truth, Impact predicted) {
    if (truth == Impact::High) (predicted == Impact::High ? tp : fn) += 1;
    else (predicted == Impact::High ? fp : tn) += 1;
  }
  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  friend bool operator==(const ClassScores&, const ClassScores&) = default;
};

struct FScores {
  ClassScores high;
  ClassScores low;
  double macro_f1 = 0.0;
  friend bool operator==(const FScores&, const FScores&) = default;
};

namespace eval_detail {

inline double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

inline ClassScores class_scores(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassScores s;
  s.precision = ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
  s.recall = ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
  s.f1 = ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
  return s;
}

}  // namespace eval_detail

/// Per-class F1 (High positive; Low scored with roles swapped) and their
/// unweighted mean. Every 0/0 is 0.
inline FScores f_score(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  FScores s;
  s.high = eval_detail::class_scores(tp, fp, fn);
  s.low = eval_detail::class_scores(tn, fn, fp);
  s.macro_f1 = (s.high.f1 + s.low.f1) / 2.0;
  return s;
}

inline FScores f_score(const Confusion& c) { return f_score(c.tp, c.fp, c.fn, c.tn); }

// ---------------------------------------------------------------------------
// Reports

struct FoldResult {
  std::size_t fold = 0;
  bool skipped = false;
  std::string skip_reason;
  Confusion confusion;
  double macro_f1 = 0.0;
  double high_f1 = 0.0;
  double low_f1 = 0.0;
};

struct CellResult {
  ProblemKind problem = ProblemKind::TotalReactions;
  std::string config;   // e.g. "c+b"; "-" for the baseline
  std::string learner;  // nb, dt, svm, knn, majority
  std::vector<FoldResult> folds;
  Confusion confusion;  // summed over evaluated folds
  double mean_macro_f1 = 0.0;
  double std_macro_f1 = 0.0;
  double mean_high_f1 = 0.0;
  double mean_low_f1 = 0.0;
  FScores pooled;  // from the summed confusion
  double wall_ms = 0.0;

  std::size_t evaluated_folds() const {
    return static_cast<std::size_t>(std::count_if(folds.begin(), folds.end(), [](const auto& f) { return !f.skipped; }));
  }
  bool skipped() const { return evaluated_folds() == 0; }
};

struct EvalReport {
  std::vector<CellResult> cells;
  std::vector<CellResult> baselines;  // majority class, one per problem
  std::size_t corpus_size = 0;
  std::string dataset_fingerprint;
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  TrainOptions options;
  std::size_t vocab_size_cap = kDefaultVocabularyCap;

  const CellResult* find(ProblemKind p, std::string_view config, std::string_view learner) const {
    for (const auto& c : cells)
      if (c.problem == p && c.config == config && c.learner == learner) return &c;
    return nullptr;
  }
};

inline std::string dataset_fingerprint(std::span<const LabeledPost> labeled) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::string_view bytes) {
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& lp : labeled) {
    mix(lp.post.id);
    mix(std::string_view("\0", 1));
    std::string bits;
    for (Impact i : lp.labels) bits += i == Impact::High ? '1' : '0';
    mix(bits);
  }
  return model_io::hex64(h);
}

namespace eval_detail {

inline void finalize(CellResult& cell) {
  std::vector<double> macro;
  double high = 0.0, low = 0.0;
  cell.confusion = {};
  for (const auto& f : cell.folds) {
    if (f.skipped) continue;
    macro.push_back(f.macro_f1);
    high += f.high_f1;
    low += f.low_f1;
    cell.confusion += f.confusion;
  }
  if (!macro.empty()) {
    const auto ms = mean_std(macro);
    cell.mean_macro_f1 = ms.mean;
    cell.std_macro_f1 = ms.stddev;
    cell.mean_high_f1 = high / static_cast<double>(macro.size());
    cell.mean_low_f1 = low / static_cast<double>(macro.size());
  }
  cell.pooled = f_score(cell.confusion);
}

inline void score_fold(FoldResult& f) {
  const auto s = f_score(f.confusion);
  f.macro_f1 = s.macro_f1;
  f.high_f1 = s.high.f1;
  f.low_f1 = s.low.f1;
}

template <typename Job>
void run_pool(std::size_t jobs, std::size_t threads, Job&& job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, jobs);
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < jobs; i = next++) job(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace eval_detail

/// Runs every (problem, config, learner) cell. Vocabulary, time profile and
/// normalizer are refit on each training fold. Cells whose training fold is
/// single-class record the fold as skipped instead of failing the run.
inline EvalReport run(const ExperimentPlan& plan, std::span<const LabeledPost> labeled) {
  plan.validate();
  if (labeled.empty()) throw EmptyCorpus();
  using clock = std::chrono::steady_clock;

  std::vector<PostAnalysis> analyses(labeled.size());
  eval_detail::run_pool(labeled.size(), plan.threads, [&](std::size_t i) { analyses[i] = analyze(labeled[i].post); });

  EvalReport report;
  report.corpus_size = labeled.size();
  report.dataset_fingerprint = dataset_fingerprint(labeled);
  report.folds = plan.folds;
  report.seed = plan.seed;
  report.options = plan.options;
  report.vocab_size_cap = plan.configs.front().vocab_size_cap;

  // Folds per problem; an unsplittable problem marks all its cells skipped.
  std::vector<std::optional<std::vector<std::vector<std::size_t>>>> folds(plan.problems.size());
  std::vector<std::string> fold_errors(plan.problems.size());
  for (std::size_t p = 0; p < plan.problems.size(); ++p) {
    try {
      folds[p] = split_folds(labeled, plan.problems[p], plan.folds, plan.seed);
    } catch (const TooFewInstances& e) {
      fold_errors[p] = e.what();
    }
  }

  const std::size_t n_cfg = plan.configs.size();
  const std::size_t n_lrn = plan.learners.size();
  report.cells.resize(plan.problems.size() * n_cfg * n_lrn);
  for (std::size_t p = 0; p < plan.problems.size(); ++p)
    for (std::size_t c = 0; c < n_cfg; ++c)
      for (std::size_t l = 0; l < n_lrn; ++l) {
        auto& cell = report.cells[(p * n_cfg + c) * n_lrn + l];
        cell.problem = plan.problems[p];
        cell.config = plan.configs[c].name();
        cell.learner = std::string(to_string(plan.learners[l]));
      }

  eval_detail::run_pool(plan.problems.size() * n_cfg, plan.threads, [&](std::size_t job) {
    const std::size_t p = job / n_cfg;
    const std::size_t c = job % n_cfg;
    const ProblemKind problem = plan.problems[p];
    const FeatureConfig& config = plan.configs[c];
    auto cell_at = [&](std::size_t l) -> CellResult& { return report.cells[(p * n_cfg + c) * n_lrn + l]; };

    if (!folds[p]) {
      for (std::size_t l = 0; l < n_lrn; ++l) {
        for (std::size_t f = 0; f < plan.folds; ++f)
          cell_at(l).folds.push_back({f, true, fold_errors[p], {}, 0.0, 0.0, 0.0});
        eval_detail::finalize(cell_at(l));
      }
      return;
    }
    const auto& fold_sets = *folds[p];
    std::vector<std::size_t> fold_of(labeled.size());
    for (std::size_t f = 0; f < fold_sets.size(); ++f)
      for (auto i : fold_sets[f]) fold_of[i] = f;

    for (std::size_t f = 0; f < fold_sets.size(); ++f) {
      const auto t0 = clock::now();
      std::vector<const PostAnalysis*> train_a;
      std::vector<Impact> train_y;
      for (std::size_t i = 0; i < labeled.size(); ++i) {
        if (fold_of[i] == f) continue;
        train_a.push_back(&analyses[i]);
        train_y.push_back(labeled[i].label(problem));
      }
      const FeaturePipeline pipeline = fit_pipeline(config, train_a);
      std::vector<FeatureVector> train_x;
      train_x.reserve(train_a.size());
      for (const auto* a : train_a) train_x.push_back(pipeline.transform(*a));
      std::vector<FeatureVector> test_x;
      for (auto i : fold_sets[f]) test_x.push_back(pipeline.transform(analyses[i]));
      const double pipeline_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();

      for (std::size_t l = 0; l < n_lrn; ++l) {
        const auto t1 = clock::now();
        FoldResult fr;
        fr.fold = f;
        TrainOptions opt = plan.options;
        opt.seed = derive_seed(plan.seed, index_of(problem), config.enabled.to_ulong(), static_cast<std::uint64_t>(l), f);
        try {
          const LearnerParams params = train_learner(plan.learners[l], train_x, train_y, opt);
          for (std::size_t t = 0; t < test_x.size(); ++t)
            fr.confusion.add(labeled[fold_sets[f][t]].label(problem), predict(params, test_x[t]).label);
          eval_detail::score_fold(fr);
        } catch (const SingleClassTraining& e) {
          fr.skipped = true;
          fr.skip_reason = e.what();
        }
        auto& cell = cell_at(l);
        cell.folds.push_back(std::move(fr));
        cell.wall_ms += pipeline_ms + std::chrono::duration<double, std::milli>(clock::now() - t1).count();
      }
    }
    for (std::size_t l = 0; l < n_lrn; ++l) eval_detail::finalize(cell_at(l));
  });

  // Majority-class baseline on the same folds.
  for (std::size_t p = 0; p < plan.problems.size(); ++p) {
    CellResult base;
    base.problem = plan.problems[p];
    base.config = "-";
    base.learner = "majority";
    if (folds[p]) {
      const auto& fold_sets = *folds[p];
      std::size_t high_total = 0;
      for (const auto& lp : labeled) high_total += lp.label(base.problem) == Impact::High;
      for (std::size_t f = 0; f < fold_sets.size(); ++f) {
        std::size_t high_test = 0;
        for (auto i : fold_sets[f]) high_test += labeled[i].label(base.problem) == Impact::High;
        const std::size_t train_n = labeled.size() - fold_sets[f].size();
        const std::size_t train_high = high_total - high_test;
        const Impact majority = 2 * train_high > train_n ? Impact::High : Impact::Low;
        FoldResult fr;
        fr.fold = f;
        for (auto i : fold_sets[f]) fr.confusion.add(labeled[i].label(base.problem), majority);
        eval_detail::score_fold(fr);
        base.folds.push_back(fr);
      }
    } else {
      for (std::size_t f = 0; f < plan.folds; ++f) base.folds.push_back({f, true, fold_errors[p], {}, 0.0, 0.0, 0.0});
    }
    eval_detail::finalize(base);
    report.baselines.push_back(std::move(base));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Output

inline nlohmann::ordered_json to_json(const CellResult& c) {
  nlohmann::ordered_json j;
  j["problem"] = to_string(c.problem);
  j["config"] = c.config;
  j["learner"] = c.learner;
  j["mean_macro_f1"] = c.mean_macro_f1;
  j["std_macro_f1"] = c.std_macro_f1;
  j["mean_high_f1"] = c.mean_high_f1;
  j["mean_low_f1"] = c.mean_low_f1;
  j["pooled"] = {{"high", {{"precision", c.pooled.high.precision}, {"recall", c.pooled.high.recall}, {"f1", c.pooled.high.f1}}},
                 {"low", {{"precision", c.pooled.low.precision}, {"recall", c.pooled.low.recall}, {"f1", c.pooled.low.f1}}},
                 {"macro_f1", c.pooled.macro_f1}};
  j["confusion"] = {{"tp", c.confusion.tp}, {"fp", c.confusion.fp}, {"fn", c.confusion.fn}, {"tn", c.confusion.tn}};
  auto folds = nlohmann::ordered_json::array();
  for (const auto& f : c.folds) {
    nlohmann::ordered_json fj;
    fj["fold"] = f.fold;
    if (f.skipped) {
      fj["skipped"] = f.skip_reason;
    } else {
      fj["macro_f1"] = f.macro_f1;
      fj["high_f1"] = f.high_f1;
      fj["low_f1"] = f.low_f1;
      fj["confusion"] = {f.confusion.tp, f.confusion.fp, f.confusion.fn, f.confusion.tn};
    }
    folds.push_back(std::move(fj));
  }
  j["folds"] = std::move(folds);
  j["wall_ms"] = c.wall_ms;
  return j;
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["corpus_size"] = r.corpus_size;
  j["dataset_fingerprint"] = r.dataset_fingerprint;
  j["protocol"] = {{"folds", r.folds},
                   {"seed", r.seed},
                   {"stratified", true},
                   {"refit_per_fold", "vocabulary, time profile and normalizer fit on training folds only"},
                   {"headline_metric", "macro_f1 (mean over folds)"},
                   {"stddev", "population"},
                   {"vocab_size_cap", r.vocab_size_cap}};
  j["hyperparameters"] = model_io::options_to_json(r.options);
  j["hyperparameters"]["svm"] = "linear kernel, Pegasos, best-objective epoch retained";
  j["hyperparameters"]["dt"] = "CART, Gini, midpoint thresholds";
  j["hyperparameters"]["knn"] = "cosine similarity, ties to lower training index";
  j["hyperparameters"]["nb"] = "multinomial, Laplace smoothing";
  auto cells = nlohmann::ordered_json::array();
  for (const auto& c : r.cells) cells.push_back(to_json(c));
  j["cells"] = std::move(cells);
  auto base = nlohmann::ordered_json::array();
  for (const auto& c : r.baselines) base.push_back(to_json(c));
  j["baselines"] = std::move(base);
  return j;
}

namespace eval_detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline void write_cell_rows(std::ostream& out, const std::vector<CellResult>& cells) {
  out << "problem\tconfig\tlearner\tmean_macro_f1\tstd_macro_f1\tmean_high_f1\tmean_low_f1\t"
         "precision_high\trecall_high\tprecision_low\trecall_low\ttp\tfp\tfn\ttn\tfolds_evaluated\tfolds_skipped\twall_ms\n";
  for (const auto& c : cells) {
    out << to_string(c.problem) << '\t' << c.config << '\t' << c.learner << '\t' << fmt(c.mean_macro_f1) << '\t'
        << fmt(c.std_macro_f1) << '\t' << fmt(c.mean_high_f1) << '\t' << fmt(c.mean_low_f1) << '\t'
        << fmt(c.pooled.high.precision) << '\t' << fmt(c.pooled.high.recall) << '\t' << fmt(c.pooled.low.precision)
        << '\t' << fmt(c.pooled.low.recall) << '\t' << c.confusion.tp << '\t' << c.confusion.fp << '\t'
        << c.confusion.fn << '\t' << c.confusion.tn << '\t' << c.evaluated_folds() << '\t'
        << c.folds.size() - c.evaluated_folds() << '\t' << fmt(c.wall_ms) << '\n';
  }
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw UnwritablePath(path.string());
  return out;
}

}  // namespace eval_detail

/// Files written into `dir`:
///   results.tsv                     one row per cell
///   baselines.tsv                   majority-class rows
///   report.json                     everything, including per-fold scores
///   figure_single_features.tsv      content-free configs, grouped by problem
///   figure_content_combinations.tsv content configs, grouped by problem, with
///                                   the best content-free score as reference
inline std::vector<std::filesystem::path> emit_report(const EvalReport& report, const std::filesystem::path& dir) {
  if (report.cells.empty()) throw EmptyReport();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw UnwritablePath(dir.string());

  std::vector<std::filesystem::path> written;
  {
    auto out = eval_detail::open_for_write(dir / "results.tsv");
    eval_detail::write_cell_rows(out, report.cells);
    written.push_back(dir / "results.tsv");
  }
  {
    auto out = eval_detail::open_for_write(dir / "baselines.tsv");
    eval_detail::write_cell_rows(out, report.baselines);
    written.push_back(dir / "baselines.tsv");
  }
  {
    auto out = eval_detail::open_for_write(dir / "report.json");
    out << to_json(report).dump(2) << '\n';
    written.push_back(dir / "report.json");
  }

  std::map<ProblemKind, double> best_single;
  for (const auto& c : report.cells)
    if (c.config.find('c') == std::string::npos)
      best_single[c.problem] = std::max(best_single[c.problem], c.mean_macro_f1);

  auto write_figure = [&](const std::string& name, bool content) {
    std::vector<const CellResult*> rows;
    for (const auto& c : report.cells)
      if ((c.config.find('c') != std::string::npos) == content) rows.push_back(&c);
    if (rows.empty()) return;
    std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) { return a->problem < b->problem; });
    auto out = eval_detail::open_for_write(dir / name);
    out << "problem\tconfig\tlearner\tmacro_f1\tstd_macro_f1" << (content ? "\tbest_single_feature_macro_f1" : "") << '\n';
    for (const auto* c : rows) {
      out << to_string(c->problem) << '\t' << c->config << '\t' << c->learner << '\t' << eval_detail::fmt(c->mean_macro_f1)
          << '\t' << eval_detail::fmt(c->std_macro_f1);
      if (content) {
        const auto it = best_single.find(c->problem);
        out << '\t' << (it == best_single.end() ? std::string("NA") : eval_detail::fmt(it->second));
      }
      out << '\n';
    }
    written.push_back(dir / name);
  };
  write_figure("figure_single_features.tsv", false);
  write_figure("figure_content_combinations.tsv", true);
  return written;
}

/// Best (config, learner) per problem by mean macro-F1; ties keep the first cell.
inline std::map<ProblemKind, const CellResult*> best_cells(const EvalReport& report) {
  std::map<ProblemKind, const CellResult*> best;
  for (const auto& c : report.cells) {
    if (c.skipped()) continue;
    auto& b = best[c.problem];
    if (b == nullptr || c.mean_macro_f1 > b->mean_macro_f1) b = &c;
  }
  return best;
}

}  // namespace postimpact
