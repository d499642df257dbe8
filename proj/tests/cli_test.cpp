#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "test_support.hpp"

namespace pi = postimpact;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

// Runs the CLI through the shell, capturing stdout; stderr is discarded.
Result run(const std::string& args, const std::string& stdin_text = "") {
  testing_support::TempDir scratch;
  const auto input = scratch / "stdin.txt";
  std::ofstream(input) << stdin_text;
  const std::string cmd = std::string("'") + POSTIMPACT_CLI + "' " + args + " < '" + input.string() + "' 2>/dev/null";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(Cli, SynthLabelTrainPredict) {
  testing_support::TempDir dir;
  ASSERT_EQ(run("synth --posts 300 --seed 3 --out " + q(dir / "raw.jsonl")).status, 0);
  ASSERT_EQ(run("filter --corpus " + q(dir / "raw.jsonl") + " --out " + q(dir / "kept.jsonl")).status, 0);
  ASSERT_EQ(run("label --corpus " + q(dir / "kept.jsonl") + " --out " + q(dir / "labeled.jsonl")).status, 0);

  const auto one = run("train --corpus " + q(dir / "labeled.jsonl") +
                       " --problem S --config c+b --learner nb --vocab-size 200 --out " + q(dir / "s.model"));
  ASSERT_EQ(one.status, 0);
  const auto model = pi::load(dir / "s.model");
  EXPECT_EQ(model.problem, pi::ProblemKind::Shares);
  EXPECT_EQ(model.kind, pi::LearnerKind::NaiveBayes);
  EXPECT_EQ(model.pipeline.config.name(), "c+b");

  const auto expl = run("explain --model " + q(dir / "s.model") + " --top 3");
  EXPECT_EQ(expl.status, 0);
  EXPECT_FALSE(expl.out.empty());

  ASSERT_EQ(run("train --corpus " + q(dir / "labeled.jsonl") + " --problem all --config c+b+s --learner dt --out " +
                q(dir / "bundle"))
                .status,
            0);
  const auto pred = run("predict --bundle " + q(dir / "bundle") +
                        " --text 'GENIAL gracias #comparte' --published-at 2017-03-14T13:00:00");
  ASSERT_EQ(pred.status, 0);
  const auto out = lines(pred.out);
  ASSERT_EQ(out.size(), 6u);
  for (const auto& l : out) EXPECT_TRUE(l.find("high") != std::string::npos || l.find("low") != std::string::npos) << l;

  const auto js = run("predict --bundle " + q(dir / "bundle") + " --json --published-at 2017-03-14T13:00:00",
                      "hola desde stdin");
  ASSERT_EQ(js.status, 0);
  EXPECT_EQ(nlohmann::json::parse(js.out)["predictions"].size(), 6u);

  EXPECT_NE(run("predict --bundle " + q(dir / "bundle") + " --text '   '").status, 0);
}

TEST(Cli, EvaluateWritesTables) {
  testing_support::TempDir dir;
  ASSERT_EQ(run("synth --posts 200 --seed 4 --out " + q(dir / "raw.jsonl")).status, 0);
  std::ofstream(dir / "plan.json") << R"({"problems":["R","S"],"configs":["b","c"],"learners":["nb"],"folds":3,
                                          "vocab_size_cap":100})";
  ASSERT_EQ(run("evaluate --plan " + q(dir / "plan.json") + " --corpus " + q(dir / "raw.jsonl") + " --seed 1 --out " +
                q(dir / "eval"))
                .status,
            0);
  std::ifstream in(dir / "eval" / "results.tsv");
  std::size_t rows = 0;
  for (std::string l; std::getline(in, l);) ++rows;
  EXPECT_EQ(rows, 1u + 4u);
}

TEST(Cli, NormalizeStdin) {
  const auto r = run("normalize --stdin", "Visita https://ej.mx #promo 😀 @juan\nhola\n");
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(lines(r.out), (std::vector<std::string>{"Visita <url> <hashtag> <emoji> <mentions>", "hola"}));
  const auto t = run("normalize --stdin --tokens", "¡Hola, MUNDO! #x\n");
  EXPECT_EQ(lines(t.out), (std::vector<std::string>{"hola mundo <hashtag>"}));
}

TEST(Cli, ErrorsExitNonZero) {
  EXPECT_NE(run("frobnicate").status, 0);
  EXPECT_NE(run("").status, 0);
  EXPECT_NE(run("train --corpus /nonexistent/file.jsonl --out /tmp/x.model").status, 0);
  EXPECT_NE(run("explain --model /nonexistent.model").status, 0);
}
