#include "samegibbs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "samegibbs/error.hpp"
#include "samegibbs/rng.hpp"

namespace samegibbs {
namespace {

void require_congruent(const CptSet& a, const CptSet& b) {
  if (!(a.shape() == b.shape())) throw Error(ErrorCode::shape_mismatch, "CPT sets have different shapes");
}

}  // namespace

double kl_avg(const CptSet& truth, const CptSet& estimate) {
  require_congruent(truth, estimate);
  const auto& shape = truth.shape();
  double sum = 0.0;
  std::size_t rows = 0;
  for (std::size_t v = 0; v < shape.num_vars(); ++v) {
    for (std::size_t r = 0; r < shape.rows(v); ++r) {
      const auto p = truth.row(v, r);
      const auto q = estimate.row(v, r);
      double kl = 0.0;
      for (std::size_t x = 0; x < p.size(); ++x)
        if (q[x] > 0.0 && p[x] > 0.0) kl += p[x] * std::log(p[x] / q[x]);
      sum += kl;
      ++rows;
    }
  }
  return rows == 0 ? 0.0 : sum / static_cast<double>(rows);
}

double avg_abs_error(const CptSet& truth, const CptSet& estimate) {
  require_congruent(truth, estimate);
  const auto p = truth.values();
  const auto q = estimate.values();
  if (p.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return sum / static_cast<double>(p.size());
}

std::vector<std::vector<double>> predict_missing(const Network& net, const CptSet& cpts,
                                                 const DataMatrix& context, std::span<const Target> targets,
                                                 const PredictOptions& options) {
  context.validate_against(net);
  if (!(cpts.shape() == TableShape(net))) throw Error(ErrorCode::shape_mismatch, "CPTs do not fit the network");
  if (options.num_samples == 0) throw Error(ErrorCode::invalid_config, "need at least one prediction sample");
  if (options.cases_per_block == 0) throw Error(ErrorCode::invalid_config, "cases per block must be positive");

  std::map<std::size_t, std::vector<std::size_t>> by_case;  // case -> target ids
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (targets[t].var >= net.num_vars() || targets[t].case_index >= context.num_cases()) {
      throw Error(ErrorCode::invalid_index, "prediction target out of range");
    }
    by_case[targets[t].case_index].push_back(t);
  }

  std::vector<std::vector<double>> freq(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) freq[t].assign(net.cardinality(targets[t].var), 0.0);

  const Coloring coloring = color_graph(moralize(net));
  const std::size_t n = net.num_vars();
  std::vector<std::pair<std::size_t, const std::vector<std::size_t>*>> cases;
  for (const auto& [c, ids] : by_case) cases.emplace_back(c, &ids);

  Minibatch mb;
  for (std::size_t block = 0, first = 0; first < cases.size(); ++block, first += options.cases_per_block) {
    const std::size_t count = std::min(options.cases_per_block, cases.size() - first);
    mb.reset(n, count, 0);
    mb.num_cases = count;
    std::fill_n(mb.weights.begin(), count, 1.0);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t c = cases[first + i].first;
      for (const Entry& e : context.case_range(c, c + 1)) mb.cells[i * n + e.var] = e.state;
      for (std::size_t t : *cases[first + i].second) mb.cells[i * n + targets[t].var] = kMissing;
    }
    ReplicatedMinibatch rep =
        replicate_minibatch(net, mb, 1, derive_key(options.seed, "predict-init", {block}));
    const std::size_t total = options.burn_in + options.num_samples;
    for (std::size_t s = 0; s < total; ++s) {
      resample_latent(net, coloring, cpts, rep, derive_key(options.seed, "predict", {block, s}), options.threads);
      if (s < options.burn_in) continue;
      for (std::size_t i = 0; i < count; ++i) {
        const auto assignment = rep.assignment(0, i);
        for (std::size_t t : *cases[first + i].second) freq[t][assignment[targets[t].var]] += 1.0;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(options.num_samples);
  for (auto& f : freq)
    for (double& x : f) x *= inv;
  return freq;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::dimension_mismatch, "scores and labels differ in length");
  }
  std::size_t positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw Error(ErrorCode::invalid_config, "labels must be 0 or 1");
    if (std::isnan(scores[i])) throw Error(ErrorCode::invalid_config, "NaN score");
    positives += static_cast<std::size_t>(labels[i]);
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::degenerate_labels, "ROC needs both positive and negative labels");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.emplace_back(0.0, 0.0);
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == threshold; ++i) (labels[order[i]] ? tp : fp) += 1;
    curve.points.emplace_back(static_cast<double>(fp) / static_cast<double>(negatives),
                              static_cast<double>(tp) / static_cast<double>(positives));
  }
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto [x0, y0] = curve.points[k - 1];
    const auto [x1, y1] = curve.points[k];
    curve.auc += (x1 - x0) * (y0 + y1) * 0.5;
  }
  return curve;
}

ThroughputSummary throughput(const Trace& trace) {
  if (trace.records.empty()) throw Error(ErrorCode::empty_trace, "trace has no records");
  ThroughputSummary out;
  double vars = 0.0;
  double seconds = 0.0;
  for (const auto& r : trace.records) {
    if (r.pass_seconds > 0.0) {
      out.per_pass.emplace_back(static_cast<double>(r.vars_sampled) / r.pass_seconds);
    } else {
      out.per_pass.emplace_back(std::nullopt);
    }
    vars += static_cast<double>(r.vars_sampled);
    seconds += r.pass_seconds;
  }
  if (seconds > 0.0) out.overall = vars / seconds;
  return out;
}

}  // namespace samegibbs
