#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "specnet/errors.hpp"
#include "specnet/experiment.hpp"
#include "specnet/mlp.hpp"
#include "specnet/oracle.hpp"
#include "support.hpp"

namespace specnet {
namespace {

namespace fs = std::filesystem;

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig config(const fs::path& out) {
  ExperimentConfig cfg;
  cfg.set("out_dir", out.string());
  return cfg;
}

TEST(Config, RejectsUnknownKeyAndBadValues) {
  ExperimentConfig cfg;
  EXPECT_THROW(cfg.set("learning_rate", "1"), ConfigError);
  cfg.set("K", "zero");
  EXPECT_THROW(cfg.validate(), ConfigError);
  ExperimentConfig c2;
  c2.set("scheme", "global");
  EXPECT_THROW(c2.validate(), ConfigError);
  ExperimentConfig c3;
  c3.set("dataset", "spiral");
  try {
    c3.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("one-moon, two-moons, mnist, csv"), std::string::npos);
  }
}

TEST(Config, FileParsing) {
  const auto dir = testing::fresh_dir("cfg");
  std::ofstream(dir / "a.cfg") << "# comment\nn = 40\n\nscheme=full  # trailing\n";
  ExperimentConfig cfg;
  cfg.load_file(dir / "a.cfg");
  EXPECT_EQ(cfg.integer("n"), 40);
  EXPECT_EQ(cfg.str("scheme"), "full");
  std::ofstream(dir / "b.cfg") << "n 40\n";
  EXPECT_THROW(cfg.load_file(dir / "b.cfg"), ConfigError);
  EXPECT_THROW(cfg.load_file(dir / "missing.cfg"), IoError);
}

TEST(GenData, DeterministicOneMoon) {
  const auto dir = testing::fresh_dir("gen1");
  ExperimentConfig cfg = config(dir / "a");
  cfg.set("n", "2000");
  cfg.set("data_seed", "7");
  cmd_gen_data(cfg);
  cfg.set("out_dir", (dir / "b").string());
  cmd_gen_data(cfg);
  const std::string a = slurp(dir / "a" / "points.csv");
  EXPECT_EQ(a, slurp(dir / "b" / "points.csv"));
  EXPECT_EQ(read_csv(dir / "a" / "points.csv").size(), 2001u);
  EXPECT_TRUE(fs::exists(dir / "a" / "config.echo"));
}

TEST(GenData, TwoMoonsLabels) {
  const auto dir = testing::fresh_dir("gen2");
  ExperimentConfig cfg = config(dir);
  cfg.set("dataset", "two-moons");
  cfg.set("n", "2000");
  cmd_gen_data(cfg);
  const auto rows = read_csv(dir / "points.csv");
  ASSERT_EQ(rows[0].back(), "label");
  int ones = 0, twos = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) (rows[r].back() == "1" ? ones : twos)++;
  EXPECT_EQ(ones, 1000);
  EXPECT_EQ(twos, 1000);
}

TEST(GenData, InvalidGenerator) {
  ExperimentConfig cfg = config(testing::fresh_dir("gen3"));
  cfg.set("dataset", "swiss-roll");
  EXPECT_THROW(cmd_gen_data(cfg), ConfigError);
}

TEST(GenData, UnwritableOutput) {
  const auto dir = testing::fresh_dir("gen4");
  std::ofstream(dir / "file") << "x";
  ExperimentConfig cfg = config(dir / "file" / "sub");
  EXPECT_THROW(cmd_gen_data(cfg), IoError);
}

TEST(BuildGraph, WritesCoo) {
  const auto dir = testing::fresh_dir("bg");
  ExperimentConfig cfg = config(dir);
  cfg.set("n", "100");
  cmd_build_graph(cfg);
  const SparseSym w = load_coo(dir / "graph.coo");
  EXPECT_EQ(w.size(), 100);
}

ExperimentConfig small_la(const fs::path& out) {
  ExperimentConfig cfg = config(out);
  cfg.set("n", "120");
  cfg.set("sigma", "0.3");
  cfg.set("scheme", "neighbor");
  cfg.set("alpha", "2");
  cfg.set("epochs", "5");
  return cfg;
}

TEST(SolveLa, HeaderAndEpochZero) {
  const auto dir = testing::fresh_dir("la0");
  ExperimentConfig cfg = small_la(dir);
  cfg.set("epochs", "0");
  cmd_solve_la(cfg);
  const auto rows = read_csv(dir / "solve_la_seed1.csv");
  ASSERT_EQ(rows.size(), 2u);
  const std::vector<std::string> header = {
      "epoch",     "objective_value", "objective_gap",     "grad_norm", "rel_err_1",
      "rel_err_2", "ball_radius",     "wall_time_s",       "mean_neighborhood",
      "macs",      "cost_full",       "cost_neighbor"};
  EXPECT_EQ(rows[0], header);
  EXPECT_EQ(rows[1][0], "0");
}

TEST(SolveLa, EchoReproducesResults) {
  const auto dir = testing::fresh_dir("la_echo");
  ExperimentConfig cfg = small_la(dir / "a");
  cfg.set("seeds", "3,4");
  cmd_solve_la(cfg);
  ExperimentConfig again;
  again.load_file(dir / "a" / "config.echo");
  again.set("out_dir", (dir / "b").string());
  cmd_solve_la(again);
  for (const char* f : {"solve_la_seed3.csv", "solve_la_seed4.csv"}) {
    auto a = read_csv(dir / "a" / f);
    auto b = read_csv(dir / "b" / f);
    ASSERT_EQ(a.size(), 7u);  // header plus epochs 0..5
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t r = 0; r < a.size(); ++r) {
      a[r].erase(a[r].begin() + 7);  // wall time
      b[r].erase(b[r].begin() + 7);
      EXPECT_EQ(a[r], b[r]);
    }
  }
  EXPECT_EQ(slurp(dir / "a" / "embedding_seed3.txt"), slurp(dir / "b" / "embedding_seed3.txt"));
}

TEST(SolveLa, NoReferenceAboveCap) {
  const auto dir = testing::fresh_dir("la_cap");
  ExperimentConfig cfg = small_la(dir);
  cfg.set("oracle_cap", "50");
  cfg.set("epochs", "1");
  cmd_solve_la(cfg);
  const auto rows = read_csv(dir / "solve_la_seed1.csv");
  EXPECT_EQ(rows[1][2], "no-reference");
  EXPECT_EQ(rows[1][4], "no-reference");
}

TEST(SolveLa, DivergenceLeavesPartialCsv) {
  const auto dir = testing::fresh_dir("la_div");
  ExperimentConfig cfg = small_la(dir);
  cfg.set("alpha", "1e9");
  EXPECT_THROW(cmd_solve_la(cfg), DivergenceError);
  EXPECT_GE(read_csv(dir / "solve_la_seed1.csv").size(), 2u);
  EXPECT_NE(slurp(dir / "errors.txt").find("divergence"), std::string::npos);
}

ExperimentConfig small_nn(const fs::path& out) {
  ExperimentConfig cfg = config(out);
  cfg.set("dataset", "two-moons");
  cfg.set("n", "80");
  cfg.set("K", "1");
  cfg.set("hidden", "16");
  cfg.set("epochs", "2");
  cfg.set("test_n", "40");
  return cfg;
}

TEST(TrainNn, SummaryAcrossSeeds) {
  const auto dir = testing::fresh_dir("nn_sum");
  ExperimentConfig cfg = small_nn(dir);
  cfg.set("seeds", "1,2,3");
  cmd_train_nn(cfg);
  const auto summary = read_csv(dir / "train_nn_summary.csv");
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0], (std::vector<std::string>{"runs", "mean_accuracy", "std_accuracy",
                                                  "mean_rel_err_1", "std_rel_err_1",
                                                  "median_rel_err_1"}));
  EXPECT_EQ(summary[1][0], "3");
  EXPECT_NE(summary[1][1], "na");
  const auto rows = read_csv(dir / "train_nn.csv");
  EXPECT_EQ(rows[0][0], "seed");
  EXPECT_EQ(rows.size(), 1u + 3u * 3u);
  for (int s = 1; s <= 3; ++s) {
    EXPECT_TRUE(fs::exists(dir / ("model_seed" + std::to_string(s) + ".txt")));
  }
}

TEST(TrainNn, CheckpointOutputMismatch) {
  const auto dir = testing::fresh_dir("nn_mis");
  save_mlp(init_mlp({2, 4, 3}, 1), nullptr, dir / "m.txt");
  ExperimentConfig cfg = small_nn(dir / "out");
  cfg.set("checkpoint", (dir / "m.txt").string());
  EXPECT_THROW(cmd_train_nn(cfg), ConfigError);
}

TEST(TrainNn, Specnet1FailureRecordedAndNextSeedRuns) {
  const auto dir = testing::fresh_dir("nn_fail");
  // A zero network makes the first factorization fail for every seed but
  // the run itself completes.
  MlpParams zero = init_mlp({2, 4, 2}, 1).zeros_like();
  save_mlp(zero, nullptr, dir / "zero.txt");
  ExperimentConfig cfg = small_nn(dir / "out");
  cfg.set("objective", "f1");
  cfg.set("checkpoint", (dir / "zero.txt").string());
  cfg.set("seeds", "1,2");
  EXPECT_NO_THROW(cmd_train_nn(cfg));
  const std::string errors = slurp(dir / "out" / "errors.txt");
  EXPECT_NE(errors.find("seed 1"), std::string::npos);
  EXPECT_NE(errors.find("seed 2"), std::string::npos);
}

TEST(Eval, ConvergedToyCheckpoint) {
  const auto dir = testing::fresh_dir("eval_toy");
  // Three nodes with one-hot coordinates; a linear network with weights equal
  // to the exact embedding is a converged checkpoint.
  Matrix w(3, 3);
  w << 1.0, 0.9, 0.1, 0.9, 1.0, 0.3, 0.1, 0.3, 1.0;
  save_coo(SparseSym::from_dense(w), dir / "g.coo");
  {
    std::ofstream pts(dir / "p.csv");
    pts << "x0,x1,x2\n1,0,0\n0,1,0\n0,0,1\n";
  }
  const Pencil p = make_pencil(SparseSym::from_dense(w), true);
  const DenseEig e = pencil_oracle(p);
  MlpParams net;
  net.sizes = {3, 1};
  net.weights = {Matrix(e.eigenvectors.col(0).transpose() * 3.0)};
  net.biases = {Vector::Zero(1)};
  save_mlp(net, nullptr, dir / "m.txt");
  ExperimentConfig cfg = config(dir / "out");
  cfg.set("dataset", "csv");
  cfg.set("data_file", (dir / "p.csv").string());
  cfg.set("graph", "file");
  cfg.set("graph_file", (dir / "g.coo").string());
  cfg.set("K", "1");
  cfg.set("checkpoint", (dir / "m.txt").string());
  cmd_eval(cfg);
  const auto rows = read_csv(dir / "out" / "eval.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"split", "rel_err_1", "subspace_error",
                                               "accuracy"}));
  EXPECT_LT(std::stod(rows[1][1]), 1e-6);
  EXPECT_LT(std::stod(rows[1][2]), 1e-6);
}

TEST(Eval, UntrainedAndNoReference) {
  const auto dir = testing::fresh_dir("eval_nn");
  ExperimentConfig cfg = small_nn(dir / "train");
  cfg.set("epochs", "0");
  cmd_train_nn(cfg);
  ExperimentConfig ev = small_nn(dir / "eval");
  ev.set("checkpoint", (dir / "train" / "model_seed1.txt").string());
  cmd_eval(ev);
  auto rows = read_csv(dir / "eval" / "eval.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][0], "train");
  EXPECT_EQ(rows[2][0], "test");
  const double err = std::stod(rows[1][1]);
  EXPECT_TRUE(std::isfinite(err));
  ev.set("oracle_cap", "10");
  cmd_eval(ev);
  rows = read_csv(dir / "eval" / "eval.csv");
  EXPECT_EQ(rows[1][1], "no-reference");
  EXPECT_EQ(rows[1][2], "no-reference");
  EXPECT_NE(rows[1][3], "na");
}

TEST(Eval, OutputDimensionMismatch) {
  const auto dir = testing::fresh_dir("eval_mis");
  save_mlp(init_mlp({2, 4, 3}, 1), nullptr, dir / "m.txt");
  ExperimentConfig cfg = small_nn(dir / "out");
  cfg.set("checkpoint", (dir / "m.txt").string());
  EXPECT_THROW(cmd_eval(cfg), InputError);
}

TEST(ExitCodes, DistinctPerFamily) {
  EXPECT_EQ(exit_code(ErrorCategory::kConfig), 2);
  EXPECT_NE(exit_code(ErrorCategory::kInput), 0);
  EXPECT_NE(exit_code(ErrorCategory::kDivergence), exit_code(ErrorCategory::kIo));
}

#ifdef SPECNET_CLI_PATH
TEST(Binary, ErrorLineAndExitCode) {
  const auto dir = testing::fresh_dir("bin");
  const std::string cmd = std::string(SPECNET_CLI_PATH) + " gen-data --dataset bogus --out_dir " +
                          (dir / "o").string() + " 2> " + (dir / "err.txt").string();
  const int status = std::system(cmd.c_str());
  ASSERT_NE(status, -1);
  EXPECT_EQ(WEXITSTATUS(status), 2);
  const std::string err = slurp(dir / "err.txt");
  EXPECT_EQ(err.rfind("error: config: ", 0), 0u) << err;
  EXPECT_EQ(std::count(err.begin(), err.end(), '\n'), 1);
  const std::string ok = std::string(SPECNET_CLI_PATH) + " gen-data --n 10 --out_dir " +
                         (dir / "ok").string();
  EXPECT_EQ(std::system(ok.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "points.csv"));
}
#endif

}  // namespace
}  // namespace specnet
