#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "samegibbs/data.hpp"
#include "samegibbs/model.hpp"
#include "samegibbs/network.hpp"
#include "samegibbs/sampler.hpp"

namespace samegibbs {

// Mean over all CPT rows of sum_x p(x) ln(p(x) / q(x)), where p is the truth
// and q the estimate. Terms with q(x) = 0 are skipped (so the result can
// understate the true divergence), and terms with p(x) = 0 contribute 0.
// Throws Error{shape_mismatch}.
double kl_avg(const CptSet& truth, const CptSet& estimate);

// Mean over all cells of |p - q|. Throws Error{shape_mismatch}.
double avg_abs_error(const CptSet& truth, const CptSet& estimate);

struct Target {
  VarIndex var;
  std::size_t case_index;
};

struct PredictOptions {
  std::size_t num_samples = 100;
  std::size_t burn_in = 0;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  std::size_t cases_per_block = 4096;
};

// Runs num_samples chromatic Gibbs sweeps with frozen CPTs over the cases that
// contain targets (target cells are treated as missing even if `context`
// holds them) and returns, per target, the sampled frequency of each state.
std::vector<std::vector<double>> predict_missing(const Network& net, const CptSet& cpts,
                                                 const DataMatrix& context,
                                                 std::span<const Target> targets,
                                                 const PredictOptions& options);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr), from (0,0) to (1,1)
  double auc = 0.0;
};

// Threshold sweep over distinct scores (descending); equal scores form one
// step, which gives ties half credit. Throws Error{degenerate_labels} unless
// both classes are present, Error{dimension_mismatch} on length mismatch.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels);

struct ThroughputSummary {
  std::vector<std::optional<double>> per_pass;  // vars/s, empty when duration is 0
  std::optional<double> overall;
};

// Throws Error{empty_trace}.
ThroughputSummary throughput(const Trace& trace);

}  // namespace samegibbs
