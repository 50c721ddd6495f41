#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include "samegibbs/data_io.hpp"
#include "samegibbs/datagen.hpp"
#include "samegibbs/error.hpp"
#include "samegibbs/network_io.hpp"

namespace samegibbs::cli {

using nlohmann::json;

namespace {

std::string num(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

NetworkFile load_with_cpts(const fs::path& path) {
  auto file = load_network_file(path);
  if (!file.cpts) throw Error(ErrorCode::parse_error, path.string() + ": network file has no cpts");
  return file;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::io_error, "write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string accumulator_name(AccumulatorMode m) { return m == AccumulatorMode::moving_sum ? "moving" : "exp"; }

AccumulatorMode parse_accumulator(const std::string& s) {
  if (s == "moving") return AccumulatorMode::moving_sum;
  if (s == "exp") return AccumulatorMode::exponential;
  throw Error(ErrorCode::invalid_config, "accumulator must be 'moving' or 'exp', got '" + s + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const fs::path& path, std::size_t line) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw Error(ErrorCode::parse_error,
                path.string() + ":" + std::to_string(line) + ": expected a number, got '" + s + "'");
  }
  return v;
}

}  // namespace

void cmd_generate(const GenerateOptions& opt, std::ostream& out) {
  const auto file = load_with_cpts(opt.network);
  auto data = forward_sample(file.network, *file.cpts, opt.cases, opt.seed);
  if (opt.hide > 0.0) data = mask(data, opt.hide, opt.seed);
  if (opt.replicate != 1) data = replicate(data, opt.replicate);
  write_data_file(opt.out, data);
  out << "vars=" << data.num_vars() << "\ncases=" << data.num_cases() << "\nnnz=" << data.nnz()
      << "\ndensity=" << num(data.density()) << "\n";
}

void cmd_split(const SplitOptions& opt, std::ostream& out) {
  const auto data = read_data_file(opt.data);
  const auto split = train_test_split(data, opt.train_fraction, opt.seed);
  write_data_file(opt.train_out, split.train);
  write_data_file(opt.test_out, split.test);
  out << "train_nnz=" << split.train.nnz() << "\ntest_nnz=" << split.test.nnz() << "\n";
}

std::string manifest_json(const TrainSpec& spec) {
  const auto& c = spec.config;
  json cfg{
      {"same_schedule", c.same.to_string()},
      {"minibatch_size", c.minibatch_size},
      {"passes", c.num_passes},
      {"alpha", c.prior.alpha},
      {"accumulator", accumulator_name(c.accumulator)},
      {"exp_decay", c.exp_decay},
      {"seed", c.seed},
      {"sweeps_per_minibatch", c.sweeps_per_minibatch},
      {"map_estimate", c.map_estimate},
      {"threads", c.threads},
      {"persist_latent", c.persists_latent()},
  };
  if (!c.prior.per_var.empty()) cfg["alpha_per_var"] = c.prior.per_var;
  json j{
      {"command", "train"},
      {"network", fs::absolute(spec.network).string()},
      {"data", fs::absolute(spec.data).string()},
      {"truth", spec.truth ? json(fs::absolute(*spec.truth).string()) : json(nullptr)},
      {"out_dir", fs::absolute(spec.out_dir).string()},
      {"config", cfg},
  };
  return j.dump(2) + "\n";
}

TrainSpec parse_manifest(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed manifest: ") + e.what());
  }
  try {
    TrainSpec spec;
    spec.network = j.at("network").get<std::string>();
    spec.data = j.at("data").get<std::string>();
    if (j.contains("truth") && !j["truth"].is_null()) spec.truth = j["truth"].get<std::string>();
    spec.out_dir = j.at("out_dir").get<std::string>();
    const auto& cfg = j.at("config");
    auto& c = spec.config;
    c.same = SameSchedule::parse(cfg.at("same_schedule").get<std::string>());
    c.minibatch_size = cfg.at("minibatch_size").get<std::size_t>();
    c.num_passes = cfg.at("passes").get<std::size_t>();
    c.prior.alpha = cfg.at("alpha").get<double>();
    if (cfg.contains("alpha_per_var")) c.prior.per_var = cfg["alpha_per_var"].get<std::vector<double>>();
    c.accumulator = parse_accumulator(cfg.at("accumulator").get<std::string>());
    c.exp_decay = cfg.at("exp_decay").get<double>();
    c.seed = cfg.at("seed").get<std::uint64_t>();
    c.sweeps_per_minibatch = cfg.at("sweeps_per_minibatch").get<std::size_t>();
    c.map_estimate = cfg.at("map_estimate").get<bool>();
    c.threads = cfg.value("threads", std::size_t{0});
    if (cfg.contains("persist_latent")) c.persist_latent = cfg["persist_latent"].get<bool>();
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("bad manifest: ") + e.what());
  }
}

TrainSpec load_manifest(const fs::path& path) {
  try {
    return parse_manifest(read_text(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::parse_error) throw;
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void cmd_train(const TrainSpec& spec, std::ostream& out) {
  const auto file = load_network_file(spec.network);
  std::optional<CptSet> truth;
  if (spec.truth) {
    auto t = load_with_cpts(*spec.truth);
    if (!(t.cpts->shape() == TableShape(file.network))) {
      throw Error(ErrorCode::shape_mismatch, spec.truth->string() + ": truth CPTs do not fit the network");
    }
    truth = std::move(t.cpts);
  }
  SameGibbsSampler sampler(file.network, spec.config);
  DataFileReader reader(spec.data, spec.config.minibatch_size);
  const auto result = sampler.run(reader, truth ? &*truth : nullptr);

  fs::create_directories(spec.out_dir);
  save_network_file(spec.out_dir / "cpts.json", file.network, &result.cpts, file.variable_names);
  write_text(spec.out_dir / "trace.csv", trace_to_csv(result.trace));
  write_text(spec.out_dir / "manifest.json", manifest_json(spec));

  out << "passes=" << result.trace.records.size() << "\ncolors=" << sampler.coloring().num_colors << "\n";
  if (truth) {
    out << "kl_avg=" << num(kl_avg(*truth, result.cpts)) << "\navg_abs_error="
        << num(avg_abs_error(*truth, result.cpts)) << "\n";
  }
  if (!result.trace.records.empty()) {
    const auto tp = throughput(result.trace);
    out << "vars_per_sec=" << (tp.overall ? num(*tp.overall) : std::string("nan")) << "\n";
  }
  out << "model_bytes=" << result.memory.model_bytes << "\naccumulator_bytes=" << result.memory.accumulator_bytes
      << "\nlatent_bytes=" << result.memory.latent_bytes << "\nout_dir=" << spec.out_dir.string() << "\n";
}

void cmd_predict(const PredictCommandOptions& opt, std::ostream& out) {
  const auto model = load_with_cpts(opt.model);
  const auto context = read_data_file(opt.context);
  const auto test = read_data_file(opt.test);
  context.validate_against(model.network);
  test.validate_against(model.network);
  if (context.num_cases() != test.num_cases()) {
    throw Error(ErrorCode::dimension_mismatch, "context and test data have different case counts");
  }
  std::vector<Target> targets;
  targets.reserve(test.nnz());
  for (const auto& e : test.entries()) targets.push_back({e.var, e.case_index});
  const auto pred = predict_missing(model.network, *model.cpts, context, targets, opt.predict);

  std::ostringstream csv;
  csv << "var,case,state,score,label\n";
  std::size_t positives = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& e = test.entries()[i];
    const double score = opt.positive_state < pred[i].size() ? pred[i][opt.positive_state] : 0.0;
    const int label = e.state == opt.positive_state ? 1 : 0;
    positives += static_cast<std::size_t>(label);
    csv << e.var << ',' << e.case_index << ',' << e.state << ',' << num(score) << ',' << label << '\n';
  }
  write_text(opt.out, csv.str());
  out << "targets=" << targets.size() << "\npositives=" << positives << "\n";
}

void cmd_evaluate(const EvaluateOptions& opt, std::ostream& out) {
  if (opt.mode == "kl") {
    const auto est = load_with_cpts(opt.cpts);
    const auto truth = load_with_cpts(opt.truth);
    if (!(est.network.edges() == truth.network.edges())) {
      throw Error(ErrorCode::shape_mismatch, "networks differ in structure");
    }
    const json j{{"kl_avg", kl_avg(*truth.cpts, *est.cpts)},
                 {"avg_abs_error", avg_abs_error(*truth.cpts, *est.cpts)}};
    out << j.dump() << "\n";
    return;
  }
  if (opt.mode != "roc") throw Error(ErrorCode::invalid_config, "unknown evaluate mode '" + opt.mode + "'");

  std::ifstream in(opt.predictions);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + opt.predictions.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::parse_error, opt.predictions.string() + ":1: empty file");
  const auto header = split_csv_line(line);
  const auto score_col = std::find(header.begin(), header.end(), "score") - header.begin();
  const auto label_col = std::find(header.begin(), header.end(), "label") - header.begin();
  if (score_col == static_cast<std::ptrdiff_t>(header.size()) ||
      label_col == static_cast<std::ptrdiff_t>(header.size())) {
    throw Error(ErrorCode::parse_error, opt.predictions.string() + ":1: need 'score' and 'label' columns");
  }
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::parse_error, opt.predictions.string() + ":" + std::to_string(lineno) +
                                              ": expected " + std::to_string(header.size()) + " columns");
    }
    scores.push_back(parse_double(cells[score_col], opt.predictions, lineno));
    labels.push_back(static_cast<int>(parse_double(cells[label_col], opt.predictions, lineno)));
  }
  const auto curve = roc_auc(scores, labels);
  if (opt.roc_out) {
    std::ostringstream csv;
    csv << "fpr,tpr\n";
    for (const auto& [fpr, tpr] : curve.points) csv << num(fpr) << ',' << num(tpr) << '\n';
    write_text(*opt.roc_out, csv.str());
  }
  out << "auc=" << num(curve.auc) << "\n";
}

void cmd_color(const fs::path& network, std::ostream& out) {
  const auto file = load_network_file(network);
  const auto graph = moralize(file.network);
  const auto coloring = color_graph(graph);
  out << "k=" << coloring.num_colors << "\ngroup_sizes=";
  for (std::size_t c = 0; c < coloring.groups.size(); ++c) out << (c ? "," : "") << coloring.groups[c].size();
  out << "\n";
  for (std::size_t c = 0; c < coloring.groups.size(); ++c) {
    out << "group " << c << ":";
    for (VarIndex v : coloring.groups[c]) {
      out << ' ' << (v < file.variable_names.size() ? file.variable_names[v] : std::to_string(v));
    }
    out << "\n";
  }
  out << "verified=" << (coloring.is_proper(graph) ? "true" : "false") << "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian network parameter learning with a SAME Gibbs sampler", "samegibbs"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "sample a dataset from a network with CPTs");
  generate->add_option("--network", gen.network, "network JSON with cpts")->required();
  generate->add_option("--cases", gen.cases, "number of cases")->required();
  generate->add_option("--hide", gen.hide, "fraction of cells to hide")->check(CLI::Range(0.0, 1.0));
  generate->add_option("--replicate", gen.replicate, "copies of the dataset")->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed);
  generate->add_option("--out", gen.out, "output data file")->required();

  SplitOptions sp;
  auto* split = app.add_subcommand("split", "split observed entries into train and test files");
  split->add_option("--data", sp.data)->required();
  split->add_option("--train-fraction", sp.train_fraction);
  split->add_option("--seed", sp.seed);
  split->add_option("--train-out", sp.train_out)->required();
  split->add_option("--test-out", sp.test_out)->required();

  TrainSpec spec;
  std::optional<std::size_t> same_m;
  std::string schedule;
  std::string accumulator = "moving";
  std::string manifest;
  std::string truth;
  auto* train = app.add_subcommand("train", "learn CPTs from a data file");
  train->add_option("--manifest", manifest, "replay a previous run's manifest.json");
  train->add_option("--network", spec.network, "network JSON");
  train->add_option("--data", spec.data, "data file");
  train->add_option("--truth", truth, "network JSON with true CPTs, for KL tracing");
  train->add_option("--out-dir", spec.out_dir, "output directory");
  auto* m_opt = train->add_option("--same-m", same_m, "replication count")->check(CLI::PositiveNumber);
  train->add_option("--same-schedule", schedule, "per-pass replication, e.g. 1x50,5x150")->excludes(m_opt);
  train->add_option("--minibatch-size", spec.config.minibatch_size);
  train->add_option("--passes", spec.config.num_passes);
  train->add_option("--alpha", spec.config.prior.alpha, "Dirichlet prior concentration");
  train->add_option("--accumulator", accumulator)->check(CLI::IsMember({"moving", "exp"}));
  train->add_option("--exp-decay", spec.config.exp_decay);
  train->add_option("--seed", spec.config.seed);
  train->add_option("--sweeps-per-minibatch", spec.config.sweeps_per_minibatch);
  train->add_flag("--map-estimate", spec.config.map_estimate, "use posterior means instead of Dirichlet draws");
  train->add_option("--threads", spec.config.threads, "worker threads (0 = all)");

  PredictCommandOptions pr;
  auto* predict = app.add_subcommand("predict", "score held-out entries with frozen CPTs");
  predict->add_option("--model", pr.model, "network JSON with cpts")->required();
  predict->add_option("--context", pr.context, "observed data")->required();
  predict->add_option("--test", pr.test, "held-out data")->required();
  predict->add_option("--out", pr.out, "predictions CSV")->required();
  predict->add_option("--samples", pr.predict.num_samples);
  predict->add_option("--burn-in", pr.predict.burn_in);
  predict->add_option("--seed", pr.predict.seed);
  predict->add_option("--threads", pr.predict.threads);
  predict->add_option("--positive-state", pr.positive_state);

  EvaluateOptions ev;
  std::string roc_out;
  auto* evaluate = app.add_subcommand("evaluate", "compare CPTs or score predictions");
  evaluate->add_option("--mode", ev.mode)->check(CLI::IsMember({"kl", "roc"}));
  evaluate->add_option("--cpts", ev.cpts);
  evaluate->add_option("--truth", ev.truth);
  evaluate->add_option("--predictions", ev.predictions);
  evaluate->add_option("--roc-out", roc_out);

  fs::path color_net;
  auto* color = app.add_subcommand("color", "color the moral graph of a network");
  color->add_option("--network", color_net)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*generate) {
      cmd_generate(gen, out);
    } else if (*split) {
      cmd_split(sp, out);
    } else if (*train) {
      if (!manifest.empty()) {
        auto replay = load_manifest(manifest);
        if (train->count("--out-dir")) replay.out_dir = spec.out_dir;
        if (train->count("--threads")) replay.config.threads = spec.config.threads;
        cmd_train(replay, out);
      } else {
        if (spec.network.empty() || spec.data.empty()) {
          err << "train: --network and --data are required unless --manifest is given\n";
          return 2;
        }
        if (same_m) spec.config.same = SameSchedule::constant(*same_m);
        if (!schedule.empty()) spec.config.same = SameSchedule::parse(schedule);
        spec.config.accumulator = parse_accumulator(accumulator);
        if (!truth.empty()) spec.truth = truth;
        cmd_train(spec, out);
      }
    } else if (*predict) {
      cmd_predict(pr, out);
    } else if (*evaluate) {
      if (!roc_out.empty()) ev.roc_out = roc_out;
      if (ev.mode == "kl" && (ev.cpts.empty() || ev.truth.empty())) {
        err << "evaluate: kl mode needs --cpts and --truth\n";
        return 2;
      }
      if (ev.mode == "roc" && ev.predictions.empty()) {
        err << "evaluate: roc mode needs --predictions\n";
        return 2;
      }
      cmd_evaluate(ev, out);
    } else if (*color) {
      cmd_color(color_net, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_validation_error(e.code()) ? 2 : 3;
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace samegibbs::cli
