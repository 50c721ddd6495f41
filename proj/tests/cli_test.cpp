#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "samegibbs/data_io.hpp"
#include "samegibbs/datagen.hpp"
#include "samegibbs/network_io.hpp"
#include "support/fixtures.hpp"

namespace samegibbs {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Value of a "key=value" line.
std::string field(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  return {};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const std::string koller_path = (testing::data_dir() / "koller_student.json").string();

TEST(CliColor, Koller) {
  const auto r = run({"color", "--network", koller_path});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "k"), "3");
  EXPECT_EQ(field(r.out, "group_sizes"), "2,2,1");
  EXPECT_EQ(field(r.out, "verified"), "true");
}

TEST(CliColor, EdgelessAndMalformed) {
  const auto dir = testing::scratch_dir("cli_color");
  std::ofstream(dir / "edgeless.json") << R"({"cardinalities": [2, 3, 2], "edges": []})";
  auto r = run({"color", "--network", (dir / "edgeless.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "k"), "1");

  std::ofstream(dir / "bad.json") << "{\n  \"cardinalities\": [2, 2],\n  \"edges\": [[0, 1]\n}\n";
  r = run({"color", "--network", (dir / "bad.json").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("ParseError"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("line 4"), std::string::npos) << r.err;
}

TEST(CliGenerate, TripleCounts) {
  const auto dir = testing::scratch_dir("cli_generate");
  auto r = run({"generate", "--network", koller_path, "--cases", "50000", "--hide", "0.5", "--seed", "2",
                "--out", (dir / "half.dat").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  // 125000 expected, sd = sqrt(250000 * 0.25) = 250
  EXPECT_NEAR(std::stod(field(r.out, "nnz")), 125000.0, 1000.0);

  r = run({"generate", "--network", koller_path, "--cases", "50000", "--out", (dir / "full.dat").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "nnz"), "250000");
  EXPECT_EQ(field(r.out, "density"), "1");

  r = run({"generate", "--network", koller_path, "--cases", "100", "--replicate", "40", "--out",
           (dir / "rep.dat").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "cases"), "4000");
}

TEST(CliGenerate, OutputParsesBackToTheSampledMatrix) {
  const auto dir = testing::scratch_dir("cli_roundtrip");
  const auto r = run({"generate", "--network", koller_path, "--cases", "700", "--hide", "0.3", "--seed", "5",
                      "--out", (dir / "d.dat").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto k = testing::koller();
  const auto expected = mask(forward_sample(k.network, *k.cpts, 700, 5), 0.3, 5);
  EXPECT_EQ(read_data_file(dir / "d.dat"), expected);
}

TEST(CliGenerate, NetworkWithoutCpts) {
  const auto dir = testing::scratch_dir("cli_nocpts");
  std::ofstream(dir / "net.json") << R"({"cardinalities": [2, 2], "edges": [[0, 1]]})";
  const auto r = run({"generate", "--network", (dir / "net.json").string(), "--cases", "5", "--out",
                      (dir / "d.dat").string()});
  EXPECT_EQ(r.code, 2);
}

TEST(CliTrain, MapEstimateOnFullyObservedDataEqualsFrequencies) {
  const auto dir = testing::scratch_dir("cli_map");
  ASSERT_EQ(run({"generate", "--network", koller_path, "--cases", "5000", "--seed", "4", "--out",
                 (dir / "d.dat").string()})
                .code,
            0);
  const auto r = run({"train", "--network", koller_path, "--data", (dir / "d.dat").string(), "--passes", "1",
                      "--minibatch-size", "1200", "--map-estimate", "--alpha", "1e-12", "--out-dir",
                      (dir / "run").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto learned = load_network_file(dir / "run" / "cpts.json");

  const auto data = read_data_file(dir / "d.dat");
  const auto& net = learned.network;
  std::map<std::pair<VarIndex, std::size_t>, std::vector<double>> rows;
  for (std::size_t c = 0; c < data.num_cases(); ++c)
    for (VarIndex v = 0; v < net.num_vars(); ++v) {
      std::size_t r = 0;
      for (VarIndex p : net.parents(v)) r = r * net.cardinality(p) + *data.at(p, c);
      auto& row = rows[{v, r}];
      row.resize(net.cardinality(v));
      row[*data.at(v, c)] += 1.0;
    }
  for (auto& [key, row] : rows) {
    double n = 0.0;
    for (double x : row) n += x;
    for (std::size_t s = 0; s < row.size(); ++s)
      EXPECT_NEAR(learned.cpts->at(key.first, key.second, s), row[s] / n, 1e-9);
  }
}

TEST(CliTrain, KollerProtocolTraceAndManifestReplay) {
  const auto dir = testing::scratch_dir("cli_train");
  ASSERT_EQ(run({"generate", "--network", koller_path, "--cases", "50000", "--hide", "0.5", "--seed", "8",
                 "--out", (dir / "d.dat").string()})
                .code,
            0);
  const auto r = run({"train", "--network", koller_path, "--data", (dir / "d.dat").string(), "--truth", koller_path,
                      "--minibatch-size", "12500", "--passes", "200", "--same-m", "1", "--seed", "3", "--out-dir",
                      (dir / "run").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LE(std::stod(field(r.out, "avg_abs_error")), 0.01);

  const auto trace = slurp(dir / "run" / "trace.csv");
  std::istringstream lines(trace);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 201u);
  EXPECT_EQ(rows[0], "pass,seconds,kl_avg,vars_per_sec");

  const auto replay = run({"train", "--manifest", (dir / "run" / "manifest.json").string(), "--out-dir",
                           (dir / "replay").string()});
  ASSERT_EQ(replay.code, 0) << replay.err;
  EXPECT_EQ(slurp(dir / "run" / "cpts.json"), slurp(dir / "replay" / "cpts.json"));

  // Everything but the wall-clock columns must match exactly.
  auto deterministic_columns = [](const std::string& csv) {
    std::istringstream in(csv);
    std::string l, out;
    while (std::getline(in, l)) {
      std::vector<std::string> cells;
      std::stringstream ss(l);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      out += cells.at(0) + "," + cells.at(2) + "\n";
    }
    return out;
  };
  EXPECT_EQ(deterministic_columns(trace), deterministic_columns(slurp(dir / "replay" / "trace.csv")));
  EXPECT_EQ(field(r.out, "kl_avg"), field(replay.out, "kl_avg"));
}

TEST(CliTrain, Errors) {
  const auto dir = testing::scratch_dir("cli_train_err");
  auto r = run({"train", "--network", koller_path, "--data", (dir / "missing.dat").string(), "--out-dir",
                (dir / "run").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("IoError"), std::string::npos);
  EXPECT_NE(r.err.find((dir / "missing.dat").string()), std::string::npos);

  // 4-variable data against the 5-variable network
  write_data_file(dir / "four.dat", DataMatrix(4, 3, {{0, 0, 1}}));
  r = run({"train", "--network", koller_path, "--data", (dir / "four.dat").string(), "--out-dir",
           (dir / "run").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("DimensionMismatch"), std::string::npos);

  r = run({"train", "--network", koller_path, "--data", (dir / "four.dat").string(), "--same-m", "2",
           "--same-schedule", "1x2,3x1"});
  EXPECT_EQ(r.code, 2);
  r = run({"train", "--network", koller_path, "--data", (dir / "four.dat").string(), "--exp-decay", "0",
           "--accumulator", "exp"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("InvalidConfig"), std::string::npos);
  r = run({"train", "--data", (dir / "four.dat").string()});
  EXPECT_EQ(r.code, 2);
}

TEST(CliEvaluate, KlOfTruthAgainstItselfIsZero) {
  const auto r = run({"evaluate", "--mode", "kl", "--cpts", koller_path, "--truth", koller_path});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "{\"avg_abs_error\":0.0,\"kl_avg\":0.0}\n");
}

TEST(CliEvaluate, KlShapeMismatch) {
  const auto dir = testing::scratch_dir("cli_eval_shape");
  const auto net = testing::chain3();
  const auto cpts = uniform_cpts(net);
  save_network_file(dir / "chain.json", net, &cpts);
  const auto r = run({"evaluate", "--mode", "kl", "--cpts", (dir / "chain.json").string(), "--truth", koller_path});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("ShapeMismatch"), std::string::npos);
}

TEST(CliEvaluate, Roc) {
  const auto dir = testing::scratch_dir("cli_roc");
  std::ofstream(dir / "perfect.csv") << "score,label\n0.9,1\n0.8,1\n0.2,0\n0.1,0\n";
  auto r = run({"evaluate", "--mode", "roc", "--predictions", (dir / "perfect.csv").string(), "--roc-out",
                (dir / "roc.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "auc"), "1");
  EXPECT_EQ(slurp(dir / "roc.csv"), "fpr,tpr\n0,0\n0,0.5\n0,1\n0.5,1\n1,1\n");

  std::ofstream(dir / "single.csv") << "score,label\n0.9,1\n0.8,1\n";
  r = run({"evaluate", "--mode", "roc", "--predictions", (dir / "single.csv").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("DegenerateLabels"), std::string::npos);

  std::ofstream(dir / "broken.csv") << "score,label\n0.9,1\nabc,0\n";
  r = run({"evaluate", "--mode", "roc", "--predictions", (dir / "broken.csv").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("broken.csv:3"), std::string::npos) << r.err;
}

TEST(CliPipeline, GenerateSplitTrainPredictEvaluate) {
  const auto dir = testing::scratch_dir("cli_pipeline");
  const auto p = [&](const char* name) { return (dir / name).string(); };
  ASSERT_EQ(run({"generate", "--network", koller_path, "--cases", "4000", "--hide", "0.2", "--out", p("all.dat")}).code,
            0);
  auto r = run({"split", "--data", p("all.dat"), "--train-fraction", "0.8", "--train-out", p("train.dat"),
                "--test-out", p("test.dat")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"train", "--network", koller_path, "--data", p("train.dat"), "--passes", "10", "--minibatch-size", "1000",
           "--out-dir", p("run")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"predict", "--model", (dir / "run" / "cpts.json").string(), "--context", p("train.dat"), "--test",
           p("test.dat"), "--samples", "50", "--out", p("pred.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::stoul(field(r.out, "targets")), read_data_file(dir / "test.dat").nnz());
  r = run({"evaluate", "--mode", "roc", "--predictions", p("pred.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  // Koller variables are strongly dependent, so held-out cells are predictable.
  EXPECT_GT(std::stod(field(r.out, "auc")), 0.6);
}

TEST(CliArgs, UnknownOptionAndHelp) {
  EXPECT_EQ(run({"train", "--bogus"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("train"), std::string::npos);
}

}  // namespace
}  // namespace samegibbs
