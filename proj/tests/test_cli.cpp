#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "modus/cli.hpp"
#include "modus/io.hpp"

using namespace modus;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("modus-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run_command(args, out_, err_);
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  std::filesystem::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

}  // namespace

TEST_F(CliTest, GenIsByteIdenticalAcrossRuns) {
  ASSERT_EQ(run({"gen", "--depths", "3", "--theories", "10", "--seed", "7", "--out", path("a.jsonl")}), 0);
  ASSERT_EQ(run({"gen", "--depths", "3", "--theories", "10", "--seed", "7", "--out", path("b.jsonl"),
                 "--jobs", "3"}),
            0);
  const auto a = slurp(path("a.jsonl"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(path("b.jsonl")));
  ASSERT_EQ(run({"gen", "--depths", "3", "--theories", "10", "--seed", "8", "--out", path("c.jsonl")}), 0);
  EXPECT_NE(a, slurp(path("c.jsonl")));
}

TEST_F(CliTest, SeedFromEnvironment) {
  ::setenv("MODUS_SEED", "7", 1);
  const int rc = run({"gen", "--depths", "3", "--theories", "10", "--out", path("env.jsonl")});
  ::unsetenv("MODUS_SEED");
  ASSERT_EQ(rc, 0) << err_.str();
  ASSERT_EQ(run({"gen", "--depths", "3", "--theories", "10", "--seed", "7", "--out", path("flag.jsonl")}), 0);
  EXPECT_EQ(slurp(path("env.jsonl")), slurp(path("flag.jsonl")));
  EXPECT_EQ(run({"gen", "--theories", "2", "--out", path("none.jsonl")}), kExitValidation);
  EXPECT_NE(err_.str().find("MODUS_SEED"), std::string::npos);
}

TEST_F(CliTest, SolveThenEvalIsPerfect) {
  ASSERT_EQ(run({"gen", "--depths", "0..5,U", "--theories", "14", "--seed", "3", "--out", path("d.jsonl")}), 0);
  for (const std::string s : {"goal", "exhaustive"}) {
    ASSERT_EQ(run({"solve", "--strategy", s, "--in", path("d.jsonl"), "--out", path(s + ".jsonl")}), 0)
        << err_.str();
  }
  ASSERT_EQ(run({"perturb", "--mode", "subject", "--n", "5", "--seed", "1", "--in", path("d.jsonl"), "--out",
                 path("e.jsonl")}),
            0);
  ASSERT_EQ(run({"solve", "--in", path("e.jsonl"), "--out", path("ev.jsonl")}), 0);
  ASSERT_EQ(run({"eval", "--pred", "goal=" + path("goal.jsonl"), "--pred", "exhaustive=" + path("exhaustive.jsonl"),
                 "--gold", path("d.jsonl"), "--equiv", path("e.jsonl"), "--equiv-pred", path("ev.jsonl"),
                 "--report", path("r.json")}),
            0)
      << err_.str();
  EXPECT_NE(out_.str().find("strategy: goal"), std::string::npos);
  const auto report = report_from_json(read_json(path("r.json")));
  for (const auto& [name, s] : report.strategies) {
    EXPECT_DOUBLE_EQ(s.depth_rows.at("All").entailment_accuracy, 1.0) << name;
    EXPECT_DOUBLE_EQ(s.depth_rows.at("All").proof_accuracy, 1.0) << name;
  }
  EXPECT_DOUBLE_EQ(report.consistency.at("subject").entailment, 1.0);
  EXPECT_DOUBLE_EQ(report.consistency.at("subject").proof, 1.0);
  ASSERT_TRUE(report.composer_call_ratio);
  EXPECT_LT(*report.composer_call_ratio, 1.0);
  EXPECT_TRUE(report.warnings.empty());
}

TEST_F(CliTest, PerturbWritesFiveVariantsPerTheory) {
  ASSERT_EQ(run({"gen", "--theories", "6", "--seed", "2", "--out", path("d.jsonl")}), 0);
  ASSERT_EQ(run({"perturb", "--mode", "attribute", "--seed", "4", "--in", path("d.jsonl"), "--out",
                 path("e.jsonl")}),
            0);
  const auto lines = read_jsonl(path("e.jsonl"));
  EXPECT_EQ(lines.size(), 30u);
  EXPECT_EQ(lines[0]["mode"], "attribute");
  EXPECT_EQ(lines[4]["variant_index"], 5);
}

TEST_F(CliTest, SolveTracesAndTextFormat) {
  ASSERT_EQ(run({"gen", "--theories", "3", "--seed", "2", "--out", path("d.jsonl")}), 0);
  ASSERT_EQ(run({"solve", "--in", path("d.jsonl"), "--out", path("p.txt"), "--format", "text", "--traces",
                 path("t.jsonl"), "--budget", "2"}),
            0);
  const auto text = slurp(path("p.txt"));
  EXPECT_NE(text.find("T00001-q1\t"), std::string::npos);
  const auto traces = read_jsonl(path("t.jsonl"));
  ASSERT_FALSE(traces.empty());
  for (const auto& t : traces) EXPECT_LE(t["steps"].size(), 2u);
}

TEST_F(CliTest, BenchReportsEveryBudget) {
  ASSERT_EQ(run({"gen", "--depths", "1..5", "--theories", "10", "--seed", "5", "--out", path("d.jsonl")}), 0);
  ASSERT_EQ(run({"bench", "--in", path("d.jsonl"), "--budgets", "1,3,5,7,10", "--report", path("b.json")}), 0)
      << err_.str();
  const auto report = report_from_json(read_json(path("b.json")));
  for (const std::string s : {"goal", "exhaustive"}) {
    const auto& curve = report.strategies.at(s).budget_curve;
    std::vector<int> keys;
    for (const auto& [b, a] : curve) keys.push_back(b);
    EXPECT_EQ(keys, (std::vector<int>{1, 3, 5, 7, 10}));
  }
  EXPECT_NE(out_.str().find("budget"), std::string::npos);
}

TEST_F(CliTest, EmitTrainingWritesThreeFiles) {
  ASSERT_EQ(run({"gen", "--theories", "4", "--seed", "9", "--out", path("d.jsonl")}), 0);
  ASSERT_EQ(run({"emit-training", "--in", path("d.jsonl"), "--out-dir", path("train")}), 0);
  const auto rs = read_jsonl(path("train/rs.jsonl"));
  const auto fs = read_jsonl(path("train/fs.jsonl"));
  const auto kc = read_jsonl(path("train/kc.jsonl"));
  EXPECT_EQ(fs.size(), kc.size());
  std::size_t questions = 0;
  for (const auto& in : load_dataset(path("d.jsonl"))) questions += in.questions.size();
  EXPECT_EQ(rs.size(), fs.size() + questions);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({"--version"}), kExitOk);
  EXPECT_NE(out_.str().find("report schema 1"), std::string::npos);
  EXPECT_EQ(run({"--help"}), kExitOk);
  EXPECT_EQ(run({}), kExitValidation);
  EXPECT_EQ(run({"solve", "--bogus-flag", "--in", "x", "--out", "y"}), kExitValidation);
  EXPECT_EQ(run({"solve", "--in", path("missing.jsonl"), "--out", path("p.jsonl")}), kExitIo);
  EXPECT_NE(err_.str().find("missing.jsonl"), std::string::npos);

  {
    std::ofstream bad(path("bad.jsonl"));
    bad << "{\"id\":\"X\",\"sentences\":{\"sent1\":\"If Anne then.\"},\"questions\":[]}\n";
  }
  EXPECT_EQ(run({"solve", "--in", path("bad.jsonl"), "--out", path("p.jsonl")}), kExitValidation);
  EXPECT_NE(err_.str().find("record 1"), std::string::npos) << err_.str();

  ASSERT_EQ(run({"gen", "--theories", "2", "--seed", "1", "--out", path("d.jsonl")}), 0);
  EXPECT_EQ(run({"solve", "--in", path("d.jsonl"), "--out", path("p.jsonl"), "--strategy", "random"}),
            kExitValidation);
  EXPECT_EQ(run({"solve", "--in", path("d.jsonl"), "--out", path("p.jsonl"), "--budget", "-1"}), kExitValidation);
  EXPECT_EQ(run({"perturb", "--mode", "color", "--seed", "1", "--in", path("d.jsonl"), "--out", path("e.jsonl")}),
            kExitValidation);
  EXPECT_EQ(run({"gen", "--depths", "9..2", "--seed", "1", "--out", path("x.jsonl")}), kExitValidation);
  EXPECT_EQ(run({"eval", "--pred", path("d.jsonl"), "--gold", path("d.jsonl")}), kExitValidation);
  // The parent of the output path is a regular file.
  EXPECT_EQ(run({"solve", "--in", path("d.jsonl"), "--out", path("d.jsonl") + "/p.jsonl"}), kExitIo);
}
