#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "samegibbs/network.hpp"

namespace samegibbs {

using State = std::uint16_t;
inline constexpr State kMissing = 0xFFFF;

// Per-variable (rows x cardinality) blocks laid out back to back.
class TableShape {
 public:
  TableShape() = default;
  explicit TableShape(const Network& net);

  std::size_t num_vars() const noexcept { return rows_.size(); }
  std::size_t rows(VarIndex v) const { return rows_[v]; }
  std::size_t cardinality(VarIndex v) const { return cards_[v]; }
  std::size_t offset(VarIndex v) const { return offsets_[v]; }
  std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }
  std::size_t total_rows() const noexcept;

  friend bool operator==(const TableShape&, const TableShape&) = default;

 private:
  std::vector<std::size_t> rows_;
  std::vector<std::size_t> cards_;
  std::vector<std::size_t> offsets_;  // size num_vars + 1
};

// Dense per-variable tables sharing one flat buffer. CptSet holds
// probabilities, CountSet holds nonnegative accumulated counts.
template <typename Tag>
class DenseTables {
 public:
  DenseTables() = default;
  explicit DenseTables(TableShape shape, double fill = 0.0)
      : shape_(std::move(shape)), values_(shape_.size(), fill) {}

  const TableShape& shape() const noexcept { return shape_; }
  std::size_t num_vars() const noexcept { return shape_.num_vars(); }

  std::span<double> row(VarIndex v, std::size_t r) {
    return {values_.data() + shape_.offset(v) + r * shape_.cardinality(v), shape_.cardinality(v)};
  }
  std::span<const double> row(VarIndex v, std::size_t r) const {
    return {values_.data() + shape_.offset(v) + r * shape_.cardinality(v), shape_.cardinality(v)};
  }
  std::span<double> table(VarIndex v) {
    return {values_.data() + shape_.offset(v), shape_.offset(v + 1) - shape_.offset(v)};
  }
  std::span<const double> table(VarIndex v) const {
    return {values_.data() + shape_.offset(v), shape_.offset(v + 1) - shape_.offset(v)};
  }
  double& at(VarIndex v, std::size_t r, std::size_t s) { return row(v, r)[s]; }
  double at(VarIndex v, std::size_t r, std::size_t s) const { return row(v, r)[s]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  std::size_t bytes() const noexcept { return values_.capacity() * sizeof(double); }

  friend bool operator==(const DenseTables&, const DenseTables&) = default;

 private:
  TableShape shape_;
  std::vector<double> values_;
};

struct CptTag {};
struct CountTag {};
using CptSet = DenseTables<CptTag>;
using CountSet = DenseTables<CountTag>;

// Uniform CPTs (every row 1/card).
CptSet uniform_cpts(const Network& net);

// Build a CptSet from nested rows: rows[v][r][s]. Throws Error{shape_mismatch}
// on wrong shape and Error{invalid_config} when a row is not a distribution.
CptSet make_cpts(const Network& net, const std::vector<std::vector<std::vector<double>>>& rows);

// Largest |sum(row) - 1| over all rows.
double max_row_deviation(const CptSet& cpts);

// Symmetric Dirichlet concentration added to every count cell at resampling
// time, optionally overridden per variable.
struct DirichletPrior {
  double alpha = 1.0;
  std::vector<double> per_var;  // empty, or one alpha per variable

  double alpha_for(VarIndex v) const { return per_var.empty() ? alpha : per_var[v]; }
  // Throws Error{invalid_config} unless every alpha is positive and finite.
  void validate(std::size_t num_vars) const;
};

// Every row drawn from Dirichlet(1, ..., 1).
CptSet init_cpts(const Network& net, std::uint64_t seed);

// p(X_v = s | Markov blanket) for every s, written to `out` (size card(v)).
// The value of assignment[v] is ignored. Throws Error{zero_support} when all
// unnormalized weights vanish.
void full_conditional(const Network& net, const CptSet& cpts, VarIndex v,
                      std::span<const State> assignment, std::span<double> out);
std::vector<double> full_conditional(const Network& net, const CptSet& cpts, VarIndex v,
                                     std::span<const State> assignment);

// Each row drawn from Dirichlet(counts_row + alpha).
CptSet sample_cpts(const CountSet& counts, const DirichletPrior& prior, std::uint64_t seed);

// Each row set to the Dirichlet posterior mean (c + alpha) / (sum c + K alpha).
CptSet posterior_mean_cpts(const CountSet& counts, const DirichletPrior& prior);

// Adds `weight` to the cell (parent config, assignment[i]) of every variable i.
void accumulate_counts(const Network& net, std::span<const State> assignment, CountSet& out,
                       double weight = 1.0);

}  // namespace samegibbs
