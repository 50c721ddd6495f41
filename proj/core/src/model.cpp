#include "samegibbs/model.hpp"

#include <cmath>
#include <string>

#include "kernels.hpp"
#include "samegibbs/error.hpp"
#include "samegibbs/rng.hpp"

namespace samegibbs {

TableShape::TableShape(const Network& net) {
  const std::size_t n = net.num_vars();
  rows_.resize(n);
  cards_.resize(n);
  offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    rows_[v] = net.num_parent_configs(v);
    cards_[v] = net.cardinality(v);
    offsets_[v + 1] = offsets_[v] + rows_[v] * cards_[v];
  }
}

std::size_t TableShape::total_rows() const noexcept {
  std::size_t total = 0;
  for (std::size_t r : rows_) total += r;
  return total;
}

CptSet uniform_cpts(const Network& net) {
  CptSet cpts{TableShape(net)};
  for (std::size_t v = 0; v < net.num_vars(); ++v) {
    const double p = 1.0 / static_cast<double>(net.cardinality(v));
    for (double& x : cpts.table(v)) x = p;
  }
  return cpts;
}

CptSet make_cpts(const Network& net, const std::vector<std::vector<std::vector<double>>>& rows) {
  CptSet cpts{TableShape(net)};
  if (rows.size() != net.num_vars()) {
    throw Error(ErrorCode::shape_mismatch, "expected " + std::to_string(net.num_vars()) +
                                               " CPTs, got " + std::to_string(rows.size()));
  }
  for (std::size_t v = 0; v < net.num_vars(); ++v) {
    if (rows[v].size() != net.num_parent_configs(v)) {
      throw Error(ErrorCode::shape_mismatch, "CPT of variable " + std::to_string(v) + " has " +
                                                 std::to_string(rows[v].size()) + " rows, expected " +
                                                 std::to_string(net.num_parent_configs(v)));
    }
    for (std::size_t r = 0; r < rows[v].size(); ++r) {
      const auto& src = rows[v][r];
      if (src.size() != net.cardinality(v)) {
        throw Error(ErrorCode::shape_mismatch,
                    "CPT row " + std::to_string(r) + " of variable " + std::to_string(v) + " has " +
                        std::to_string(src.size()) + " entries");
      }
      double sum = 0.0;
      for (double p : src) {
        if (!(p >= 0.0 && p <= 1.0)) {
          throw Error(ErrorCode::invalid_config,
                      "CPT entry outside [0, 1] for variable " + std::to_string(v));
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-6) {
        throw Error(ErrorCode::invalid_config, "CPT row " + std::to_string(r) + " of variable " +
                                                   std::to_string(v) + " sums to " + std::to_string(sum));
      }
      auto dst = cpts.row(v, r);
      for (std::size_t s = 0; s < src.size(); ++s) dst[s] = src[s] / sum;
    }
  }
  return cpts;
}

double max_row_deviation(const CptSet& cpts) {
  double worst = 0.0;
  const auto& shape = cpts.shape();
  for (std::size_t v = 0; v < shape.num_vars(); ++v) {
    for (std::size_t r = 0; r < shape.rows(v); ++r) {
      double sum = 0.0;
      for (double p : cpts.row(v, r)) sum += p;
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  }
  return worst;
}

void DirichletPrior::validate(std::size_t num_vars) const {
  auto check = [](double a) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw Error(ErrorCode::invalid_config, "Dirichlet alpha must be positive, got " + std::to_string(a));
    }
  };
  check(alpha);
  if (!per_var.empty()) {
    if (per_var.size() != num_vars) {
      throw Error(ErrorCode::invalid_config, "per-variable alpha needs one value per variable");
    }
    for (double a : per_var) check(a);
  }
}

namespace {

// Draw from Dirichlet(shape_s) into `out`; falls back to the normalized
// shape vector if every gamma variate underflows.
void dirichlet_row(CounterRng& rng, std::span<const double> shape, std::span<double> out) {
  double sum = 0.0;
  for (std::size_t s = 0; s < shape.size(); ++s) {
    out[s] = rng.gamma(shape[s]);
    sum += out[s];
  }
  if (!(sum > 0.0)) {
    sum = 0.0;
    for (std::size_t s = 0; s < shape.size(); ++s) sum += (out[s] = shape[s]);
  }
  for (double& x : out) x /= sum;
}

}  // namespace

CptSet init_cpts(const Network& net, std::uint64_t seed) {
  CptSet cpts{TableShape(net)};
  const std::uint64_t key = derive_key(seed, "init-cpts");
  std::vector<double> ones;
  for (std::size_t v = 0; v < net.num_vars(); ++v) {
    ones.assign(net.cardinality(v), 1.0);
    for (std::size_t r = 0; r < net.num_parent_configs(v); ++r) {
      CounterRng rng(key, static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(r));
      dirichlet_row(rng, ones, cpts.row(v, r));
    }
  }
  return cpts;
}

void full_conditional(const Network& net, const CptSet& cpts, VarIndex v,
                      std::span<const State> assignment, std::span<double> out) {
  const double total = detail::conditional_weights(net, cpts, v, assignment, out.data());
  if (!(total > 0.0)) {
    throw Error(ErrorCode::zero_support,
                "full conditional of variable " + std::to_string(v) + " has no support");
  }
  for (double& p : out) p /= total;
}

std::vector<double> full_conditional(const Network& net, const CptSet& cpts, VarIndex v,
                                     std::span<const State> assignment) {
  std::vector<double> out(net.cardinality(v));
  full_conditional(net, cpts, v, assignment, out);
  return out;
}

CptSet sample_cpts(const CountSet& counts, const DirichletPrior& prior, std::uint64_t seed) {
  const auto& shape = counts.shape();
  CptSet cpts{shape};
  const std::uint64_t key = derive_key(seed, "sample-cpts");
  std::vector<double> params;
  for (std::size_t v = 0; v < shape.num_vars(); ++v) {
    const double alpha = prior.alpha_for(v);
    params.resize(shape.cardinality(v));
    for (std::size_t r = 0; r < shape.rows(v); ++r) {
      const auto c = counts.row(v, r);
      for (std::size_t s = 0; s < c.size(); ++s) params[s] = c[s] + alpha;
      CounterRng rng(key, static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(r));
      dirichlet_row(rng, params, cpts.row(v, r));
    }
  }
  return cpts;
}

CptSet posterior_mean_cpts(const CountSet& counts, const DirichletPrior& prior) {
  const auto& shape = counts.shape();
  CptSet cpts{shape};
  for (std::size_t v = 0; v < shape.num_vars(); ++v) {
    const double alpha = prior.alpha_for(v);
    for (std::size_t r = 0; r < shape.rows(v); ++r) {
      const auto c = counts.row(v, r);
      double total = 0.0;
      for (double x : c) total += x + alpha;
      auto out = cpts.row(v, r);
      for (std::size_t s = 0; s < c.size(); ++s) out[s] = (c[s] + alpha) / total;
    }
  }
  return cpts;
}

void accumulate_counts(const Network& net, std::span<const State> assignment, CountSet& out,
                       double weight) {
  for (std::size_t v = 0; v < net.num_vars(); ++v)
    out.at(v, net.parent_config(v, assignment), assignment[v]) += weight;
}

}  // namespace samegibbs
