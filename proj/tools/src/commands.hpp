#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "samegibbs/metrics.hpp"
#include "samegibbs/sampler.hpp"

namespace samegibbs::cli {

namespace fs = std::filesystem;

struct GenerateOptions {
  fs::path network;
  fs::path out;
  std::size_t cases = 1000;
  double hide = 0.0;
  std::size_t replicate = 1;
  std::uint64_t seed = 1;
};

// Forward-samples, hides and replicates data from a network file with CPTs.
void cmd_generate(const GenerateOptions& opt, std::ostream& out);

struct SplitOptions {
  fs::path data;
  fs::path train_out;
  fs::path test_out;
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
};

void cmd_split(const SplitOptions& opt, std::ostream& out);

// Everything needed to reproduce a training run.
struct TrainSpec {
  fs::path network;
  fs::path data;
  std::optional<fs::path> truth;
  fs::path out_dir = "run";
  SamplerConfig config;
};

std::string manifest_json(const TrainSpec& spec);
TrainSpec parse_manifest(const std::string& text);
TrainSpec load_manifest(const fs::path& path);

// Streams the data file through the sampler and writes cpts.json, trace.csv
// and manifest.json to spec.out_dir.
void cmd_train(const TrainSpec& spec, std::ostream& out);

struct PredictCommandOptions {
  fs::path model;    // network file with CPTs
  fs::path context;  // observed cells available at prediction time
  fs::path test;     // held-out cells to predict
  fs::path out;
  State positive_state = 1;
  PredictOptions predict;
};

// Writes CSV "var,case,state,score,label": score is the sampled frequency of
// positive_state, label whether the held-out state equals it.
void cmd_predict(const PredictCommandOptions& opt, std::ostream& out);

struct EvaluateOptions {
  std::string mode = "kl";  // kl | roc
  fs::path cpts;
  fs::path truth;
  fs::path predictions;
  std::optional<fs::path> roc_out;
};

// kl: prints {"kl_avg": ..., "avg_abs_error": ...}.
// roc: prints auc=<value>; writes the "fpr,tpr" curve to roc_out if given.
void cmd_evaluate(const EvaluateOptions& opt, std::ostream& out);

void cmd_color(const fs::path& network, std::ostream& out);

// Parses arguments and dispatches. Returns the process exit code:
// 0 success, 2 parse or validation error, 3 runtime error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace samegibbs::cli
