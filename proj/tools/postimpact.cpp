// Command-line front end for the post impact pipeline.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "postimpact/postimpact.hpp"
#include "postimpact/server.hpp"

namespace pi = postimpact;
using nlohmann::json;

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pi::Error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw pi::UnwritablePath(path);
  return out;
}

pi::TokenStream stats_tokens(std::string_view text) { return pi::tokenize(pi::normalize(text)); }

/// Labeled corpus from a file; unlabeled input is filtered and labeled first.
std::vector<pi::LabeledPost> load_labeled(const std::string& path) {
  auto in = open_in(path);
  auto file = pi::read_corpus(in);
  if (file.labeled) return std::move(*file.labeled);
  auto kept = pi::filter(std::move(file.posts)).kept;
  std::cerr << "note: " << path << " has no labels; filtered to " << kept.size() << " posts and labeled\n";
  return pi::label(kept);
}

pi::ProblemKind problem_arg(const std::string& s) {
  const auto p = pi::parse_problem(s);
  if (!p) throw pi::Error("unknown problem '" + s + "' (expected R, R+, R-, R0, C, S or a full name)");
  return *p;
}

pi::LearnerKind learner_arg(const std::string& s) {
  const auto l = pi::parse_learner(s);
  if (!l) throw pi::Error("unknown learner '" + s + "' (expected nb, dt, svm, knn)");
  return *l;
}

struct LearnerFlags {
  std::uint64_t seed = 0;
  bool balanced = false;
  pi::TrainOptions defaults;

  void add(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    cmd->add_flag("--balanced", balanced, "Weight classes inversely to their frequency");
    cmd->add_option("--nb-alpha", defaults.nb_alpha, "Naive Bayes smoothing")->capture_default_str();
    cmd->add_option("--svm-lambda", defaults.svm_lambda, "SVM regularization")->capture_default_str();
    cmd->add_option("--svm-epochs", defaults.svm_epochs, "SVM epochs")->capture_default_str();
    cmd->add_option("--dt-max-depth", defaults.dt_max_depth, "Decision tree depth limit")->capture_default_str();
    cmd->add_option("--dt-min-split", defaults.dt_min_samples_split, "Decision tree minimum node size to split")
        ->capture_default_str();
    cmd->add_option("--knn-k", defaults.knn_k, "Neighbours for KNN")->capture_default_str();
  }

  pi::TrainOptions options() const {
    auto o = defaults;
    o.seed = seed;
    o.balanced_class_weights = balanced;
    return o;
  }
};

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

void print_forecast(const pi::ImpactForecast& f) {
  for (pi::ProblemKind k : pi::kAllProblems) {
    const auto& p = f[k];
    std::cout << pi::to_string(k) << '\t' << pi::to_string(p.label) << '\t' << fixed(p.score, 4) << '\t'
              << f.model_versions[pi::index_of(k)] << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predict the engagement impact of brand posts"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // ingest ------------------------------------------------------------------
  std::string ingest_in, ingest_out;
  auto* ingest = app.add_subcommand("ingest", "Validate raw JSONL posts and write a canonical corpus");
  ingest->add_option("--input", ingest_in, "Raw JSONL, one post per line")->required();
  ingest->add_option("--out", ingest_out, "Canonical JSONL output")->required();

  // filter ------------------------------------------------------------------
  std::string filter_in, filter_out, filter_removed;
  auto* filt = app.add_subcommand("filter", "Drop posts without text, without reactions, or with only likes");
  filt->add_option("--corpus", filter_in, "Corpus JSONL")->required();
  filt->add_option("--out", filter_out, "Kept posts JSONL")->required();
  filt->add_option("--removed", filter_removed, "Optional TSV of removed ids and reasons");

  // label -------------------------------------------------------------------
  std::string label_in, label_out;
  bool label_by_brand = false;
  auto* lab = app.add_subcommand("label", "Mark each post high/low against the corpus mean of each metric");
  lab->add_option("--corpus", label_in, "Filtered corpus JSONL")->required();
  lab->add_option("--out", label_out, "Labeled JSONL output")->required();
  lab->add_flag("--by-brand", label_by_brand, "Print high/low counts per brand");

  // stats -------------------------------------------------------------------
  std::string stats_in;
  bool stats_json = false;
  auto* stats = app.add_subcommand("stats", "Per-brand post, token and vocabulary statistics");
  stats->add_option("--corpus", stats_in, "Corpus JSONL")->required();
  stats->add_flag("--json", stats_json, "Emit JSON instead of a table");

  // featurize ---------------------------------------------------------------
  std::string feat_in, feat_out, feat_config = "all";
  std::size_t feat_cap = pi::kDefaultVocabularyCap;
  auto* feat = app.add_subcommand("featurize", "Fit a feature pipeline on a corpus and write normalized vectors");
  feat->add_option("--corpus", feat_in, "Labeled corpus JSONL")->required();
  feat->add_option("--config", feat_config, "Feature blocks, e.g. c,b or b+s+i+t")->capture_default_str();
  feat->add_option("--vocab-size", feat_cap, "Vocabulary cap")->capture_default_str();
  feat->add_option("--out", feat_out, "Vector JSONL output")->required();

  // train -------------------------------------------------------------------
  std::string train_in, train_out, train_problem, train_config = "c", train_learner = "nb", train_report;
  std::size_t train_cap = pi::kDefaultVocabularyCap;
  LearnerFlags train_flags;
  auto* tr = app.add_subcommand("train", "Train a model, or a six-model bundle with --problem all / --from-report");
  tr->add_option("--corpus", train_in, "Labeled corpus JSONL")->required();
  tr->add_option("--problem", train_problem, "R, R+, R-, R0, C, S, or all");
  tr->add_option("--config", train_config, "Feature blocks")->capture_default_str();
  tr->add_option("--learner", train_learner, "nb, dt, svm or knn")->capture_default_str();
  tr->add_option("--vocab-size", train_cap, "Vocabulary cap")->capture_default_str();
  tr->add_option("--from-report", train_report, "Pick the best config and learner per problem from report.json");
  tr->add_option("--out", train_out, "Model file, or bundle directory for all problems")->required();
  train_flags.add(tr);

  // evaluate ----------------------------------------------------------------
  std::string eval_plan, eval_in, eval_out;
  std::optional<std::uint64_t> eval_seed;
  std::optional<std::size_t> eval_threads;
  auto* ev = app.add_subcommand("evaluate", "Cross-validate a plan of problems x configs x learners");
  ev->add_option("--plan", eval_plan, "Plan JSON (problems, configs, learners, folds, seed)")->required();
  ev->add_option("--corpus", eval_in, "Labeled corpus JSONL")->required();
  ev->add_option("--seed", eval_seed, "Overrides the plan seed");
  ev->add_option("--threads", eval_threads, "Worker threads (0 = all cores)");
  ev->add_option("--out", eval_out, "Output directory")->required();

  // predict -----------------------------------------------------------------
  std::string pred_bundle, pred_text, pred_file, pred_link = "none", pred_time;
  bool pred_json = false;
  auto* pr = app.add_subcommand("predict", "Score a draft post against a bundle (text from --text, --file or stdin)");
  pr->add_option("--bundle", pred_bundle, "Bundle directory")->required();
  auto* text_opt = pr->add_option("--text", pred_text, "Draft text");
  pr->add_option("--file", pred_file, "Read the draft text from a file")->excludes(text_opt);
  pr->add_option("--link-kind", pred_link, "image, album, video, other or none")->capture_default_str();
  pr->add_option("--published-at", pred_time, "ISO-8601 posting time (default: now)");
  pr->add_flag("--json", pred_json, "Emit the forecast as JSON");

  // serve -------------------------------------------------------------------
  std::string serve_bundle, serve_host = "127.0.0.1";
  std::optional<int> serve_port;
  pi::ServiceOptions serve_opts;
  auto* sv = app.add_subcommand("serve", "HTTP service: POST /predict, GET /health");
  sv->add_option("--bundle", serve_bundle, "Bundle directory")->required();
  sv->add_option("--host", serve_host, "Bind address")->capture_default_str();
  sv->add_option("--port", serve_port, "Port (default: $POSTIMPACT_PORT or 8080)");
  sv->add_option("--threads", serve_opts.worker_threads, "Worker threads")->capture_default_str();
  sv->add_option("--max-in-flight", serve_opts.max_in_flight, "Concurrent requests before 503")->capture_default_str();

  // explain -----------------------------------------------------------------
  std::string explain_model;
  std::size_t explain_top = 20;
  auto* ex = app.add_subcommand("explain", "Most indicative tokens of a naive Bayes content model");
  ex->add_option("--model", explain_model, "Model file")->required();
  ex->add_option("--top", explain_top, "Tokens per class")->capture_default_str();

  // normalize ---------------------------------------------------------------
  bool norm_stdin = false, norm_tokens = false;
  auto* nm = app.add_subcommand("normalize", "Replace urls, hashtags, emojis and mentions with tags, line by line");
  nm->add_flag("--stdin", norm_stdin, "Read lines from standard input")->required();
  nm->add_flag("--tokens", norm_tokens, "Print space-separated tokens instead");

  // synth -------------------------------------------------------------------
  pi::SyntheticOptions synth_opts;
  std::string synth_out;
  auto* sy = app.add_subcommand("synth", "Generate a synthetic corpus with planted signal");
  sy->add_option("--posts", synth_opts.posts, "Number of posts")->capture_default_str();
  sy->add_option("--seed", synth_opts.seed, "Random seed")->capture_default_str();
  sy->add_option("--out", synth_out, "Corpus JSONL output")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      auto in = open_in(ingest_in);
      const auto posts = pi::ingest(in);
      auto out = open_out(ingest_out);
      pi::write_corpus(out, posts);
      std::cout << "ingested " << posts.size() << " posts\n";
    } else if (*filt) {
      auto in = open_in(filter_in);
      auto result = pi::filter(pi::ingest(in));
      auto out = open_out(filter_out);
      pi::write_corpus(out, result.kept);
      std::map<std::string, std::size_t> by_reason;
      for (const auto& [post, reason] : result.removed) ++by_reason[std::string(pi::to_string(reason))];
      if (!filter_removed.empty()) {
        auto rem = open_out(filter_removed);
        rem << "id\tbrand\treason\n";
        for (const auto& [post, reason] : result.removed) rem << post.id << '\t' << post.brand << '\t' << pi::to_string(reason) << '\n';
      }
      std::cout << "kept " << result.kept.size() << ", removed " << result.removed.size();
      for (const auto& [r, n] : by_reason) std::cout << " (" << r << ": " << n << ")";
      std::cout << '\n';
    } else if (*lab) {
      auto in = open_in(label_in);
      const auto labeled = pi::label(pi::ingest(in));
      auto out = open_out(label_out);
      pi::write_corpus(out, labeled);
      std::map<std::string, std::array<std::array<std::size_t, 2>, 6>> counts;
      std::array<std::array<std::size_t, 2>, 6> total{};
      for (const auto& lp : labeled)
        for (pi::ProblemKind k : pi::kAllProblems) {
          const auto hi = lp.label(k) == pi::Impact::High ? 0 : 1;
          ++counts[lp.post.brand][pi::index_of(k)][hi];
          ++total[pi::index_of(k)][hi];
        }
      std::cout << "brand";
      for (pi::ProblemKind k : pi::kAllProblems) std::cout << '\t' << pi::short_code(k) << " high/low";
      std::cout << '\n';
      auto row = [](const std::string& name, const auto& c) {
        std::cout << name;
        for (const auto& hl : c) std::cout << '\t' << hl[0] << '/' << hl[1];
        std::cout << '\n';
      };
      if (label_by_brand)
        for (const auto& [brand, c] : counts) row(brand, c);
      row("all", total);
    } else if (*stats) {
      auto in = open_in(stats_in);
      const auto posts = pi::ingest(in);
      const auto s = pi::compute_stats(posts, stats_tokens);
      if (stats_json) {
        json j = json::array();
        for (const auto& b : s.brands)
          j.push_back({{"brand", b.brand},
                       {"posts", b.posts},
                       {"tokens", b.token_count},
                       {"vocabulary", b.vocabulary_size},
                       {"lexical_richness", b.lexical_richness},
                       {"tokens_per_post", {{"mean", b.tokens_per_post.mean}, {"std", b.tokens_per_post.stddev}}},
                       {"chars_per_post", {{"mean", b.chars_per_post.mean}, {"std", b.chars_per_post.stddev}}}});
        std::cout << j.dump(2) << '\n';
      } else {
        std::cout << "brand\tposts\ttokens\tvocabulary\tlexical_richness\ttokens_per_post\tchars_per_post\n";
        for (const auto& b : s.brands)
          std::cout << b.brand << '\t' << b.posts << '\t' << b.token_count << '\t' << b.vocabulary_size << '\t'
                    << fixed(b.lexical_richness, 3) << '\t' << fixed(b.tokens_per_post.mean, 1) << " +/- "
                    << fixed(b.tokens_per_post.stddev, 1) << '\t' << fixed(b.chars_per_post.mean, 1) << " +/- "
                    << fixed(b.chars_per_post.stddev, 1) << '\n';
      }
    } else if (*feat) {
      const auto labeled = load_labeled(feat_in);
      const auto config = pi::config_of(feat_config, feat_cap);
      std::vector<pi::PostAnalysis> analyses;
      std::vector<const pi::PostAnalysis*> ptrs;
      analyses.reserve(labeled.size());
      for (const auto& lp : labeled) analyses.push_back(pi::analyze(lp.post));
      for (const auto& a : analyses) ptrs.push_back(&a);
      const auto pipeline = pi::fit_pipeline(config, ptrs);
      auto out = open_out(feat_out);
      for (std::size_t i = 0; i < labeled.size(); ++i) {
        json row;
        row["id"] = labeled[i].post.id;
        for (pi::ProblemKind k : pi::kAllProblems)
          row["labels"][std::string(pi::to_string(k))] = pi::to_string(labeled[i].label(k));
        row["x"] = pi::model_io::vector_to_json(pipeline.transform(analyses[i]));
        out << row.dump() << '\n';
      }
      std::cout << "wrote " << labeled.size() << " vectors of dimension " << pipeline.dim() << " (" << config.name()
                << ")\n";
    } else if (*tr) {
      const auto labeled = load_labeled(train_in);
      const auto opt = train_flags.options();
      if (!train_report.empty()) {
        auto in = open_in(train_report);
        const json report = json::parse(in);
        std::map<std::string, std::pair<double, json>> best;
        for (const auto& c : report.at("cells")) {
          bool skipped = true;
          for (const auto& f : c.at("folds")) skipped = skipped && f.contains("skipped");
          if (skipped) continue;
          const auto key = c.at("problem").get<std::string>();
          const double score = c.at("mean_macro_f1").get<double>();
          auto it = best.find(key);
          if (it == best.end() || score > it->second.first) best[key] = {score, c};
        }
        std::array<pi::Model, 6> models;
        json provenance = {{"report", train_report}, {"choices", json::object()}};
        for (pi::ProblemKind k : pi::kAllProblems) {
          const std::string key(pi::to_string(k));
          const auto it = best.find(key);
          if (it == best.end()) throw pi::ModelMissing(key);
          const auto& cell = it->second.second;
          const auto config = pi::config_of(cell.at("config").get<std::string>(), train_cap);
          const auto learner = learner_arg(cell.at("learner").get<std::string>());
          models[pi::index_of(k)] = pi::train(learner, k, config, labeled, opt);
          provenance["choices"][key] = {{"config", config.name()}, {"learner", pi::to_string(learner)},
                                        {"mean_macro_f1", it->second.first}};
          std::cout << key << '\t' << config.name() << '\t' << pi::to_string(learner) << '\t'
                    << fixed(it->second.first, 4) << '\n';
        }
        pi::Bundle(std::move(models)).save(train_out, provenance);
        std::cout << "bundle written to " << train_out << '\n';
      } else {
        if (train_problem.empty()) throw pi::Error("--problem is required unless --from-report is given");
        const auto config = pi::config_of(train_config, train_cap);
        const auto learner = learner_arg(train_learner);
        if (train_problem == "all") {
          std::array<pi::Model, 6> models;
          for (pi::ProblemKind k : pi::kAllProblems) models[pi::index_of(k)] = pi::train(learner, k, config, labeled, opt);
          pi::Bundle(std::move(models)).save(train_out, {{"config", config.name()}, {"learner", pi::to_string(learner)}});
          std::cout << "bundle written to " << train_out << '\n';
        } else {
          const auto m = pi::train(learner, problem_arg(train_problem), config, labeled, opt);
          pi::save(m, train_out);
          std::cout << "model " << m.version << " written to " << train_out << '\n';
        }
      }
    } else if (*ev) {
      auto plan_in = open_in(eval_plan);
      auto plan = pi::parse_plan(json::parse(plan_in));
      if (eval_seed) plan.seed = *eval_seed;
      if (eval_threads) plan.threads = *eval_threads;
      const auto labeled = load_labeled(eval_in);
      const auto report = pi::run(plan, labeled);
      for (const auto& p : pi::emit_report(report, eval_out)) std::cout << p.string() << '\n';
      for (const auto& [problem, cell] : pi::best_cells(report))
        std::cout << "best " << pi::to_string(problem) << '\t' << cell->config << '\t' << cell->learner << '\t'
                  << fixed(cell->mean_macro_f1, 4) << '\n';
    } else if (*pr) {
      pi::DraftPost draft;
      if (!pred_text.empty() || *text_opt) {
        draft.text = pred_text;
      } else if (!pred_file.empty()) {
        auto in = open_in(pred_file);
        draft.text.assign(std::istreambuf_iterator<char>(in), {});
      } else {
        draft.text.assign(std::istreambuf_iterator<char>(std::cin), {});
      }
      const auto kind = pi::parse_link_kind(pred_link);
      if (!kind) throw pi::Error("unknown link kind '" + pred_link + "'");
      draft.link_kind = *kind;
      if (!pred_time.empty()) {
        const auto t = pi::parse_iso8601(pred_time);
        if (!t) throw pi::Error("--published-at is not an ISO-8601 timestamp");
        draft.published_at = *t;
      }
      const auto bundle = pi::Bundle::load(pred_bundle);
      const auto f = pi::forecast(draft, bundle);
      if (pred_json) std::cout << pi::to_json(f).dump(2) << '\n';
      else print_forecast(f);
    } else if (*sv) {
      serve_opts.host = serve_host;
      if (serve_port) {
        serve_opts.port = *serve_port;
      } else if (const char* env = std::getenv("POSTIMPACT_PORT")) {
        serve_opts.port = std::atoi(env);
      }
      auto bundle = std::make_shared<const pi::Bundle>(pi::Bundle::load(serve_bundle));
      pi::Service service(bundle, serve_opts);
      const int port = service.bind();
      std::cerr << "listening on " << serve_opts.host << ':' << port << '\n';
      service.listen();
    } else if (*ex) {
      const auto m = pi::load(explain_model);
      const auto e = pi::explain(m, explain_top);
      std::cout << "class\ttoken\tlog_odds\n";
      for (const auto& t : e.high) std::cout << "high\t" << t.token << '\t' << fixed(t.log_odds, 4) << '\n';
      for (const auto& t : e.low) std::cout << "low\t" << t.token << '\t' << fixed(t.log_odds, 4) << '\n';
    } else if (*nm) {
      std::string line;
      while (std::getline(std::cin, line)) {
        const auto n = pi::normalize(line);
        if (norm_tokens) {
          const auto toks = pi::tokenize(n);
          for (std::size_t i = 0; i < toks.size(); ++i) std::cout << (i ? " " : "") << toks[i];
          std::cout << '\n';
        } else {
          std::cout << n.text << '\n';
        }
      }
    } else if (*sy) {
      const auto posts = pi::synthesize(synth_opts);
      auto out = open_out(synth_out);
      pi::write_corpus(out, posts);
      std::cout << "wrote " << posts.size() << " posts\n";
    }
  } catch (const pi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: invalid JSON: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
