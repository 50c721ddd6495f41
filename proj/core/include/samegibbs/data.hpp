#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "samegibbs/model.hpp"
#include "samegibbs/network.hpp"

namespace samegibbs {

// One observed cell. Indices and states are 0-based in memory.
struct Entry {
  VarIndex var;
  std::size_t case_index;
  State state;

  friend bool operator==(const Entry&, const Entry&) = default;
};

// Sparse variables x cases observation matrix; absent cells are missing.
// Entries are kept sorted by (case, var) with no duplicates.
class DataMatrix {
 public:
  DataMatrix() = default;
  DataMatrix(std::size_t num_vars, std::size_t num_cases) : num_vars_(num_vars), num_cases_(num_cases) {}
  // Sorts `entries`; throws Error{invalid_index} for out-of-range or duplicate
  // cells.
  DataMatrix(std::size_t num_vars, std::size_t num_cases, std::vector<Entry> entries);

  std::size_t num_vars() const noexcept { return num_vars_; }
  std::size_t num_cases() const noexcept { return num_cases_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  std::span<const Entry> entries() const noexcept { return entries_; }
  double density() const noexcept;

  std::optional<State> at(VarIndex var, std::size_t case_index) const;

  // Entries of cases [first, last).
  std::span<const Entry> case_range(std::size_t first, std::size_t last) const;

  // Throws Error{dimension_mismatch} if the variable count differs or a state
  // is outside its variable's cardinality.
  void validate_against(const Network& net) const;

  friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

 private:
  std::size_t num_vars_ = 0;
  std::size_t num_cases_ = 0;
  std::vector<Entry> entries_;
};

// A fixed-capacity block of cases in dense case-major layout.
// cells[c * num_vars + v] holds the observed state or kMissing. Cases past
// num_cases are padding: fully missing with weight 0.
struct Minibatch {
  std::size_t num_vars = 0;
  std::size_t first_case = 0;  // global index of case 0
  std::size_t num_cases = 0;   // real cases
  std::size_t capacity = 0;
  std::vector<State> cells;
  std::vector<double> weights;

  void reset(std::size_t vars, std::size_t cap, std::size_t first);
  std::span<const State> case_cells(std::size_t c) const {
    return {cells.data() + c * num_vars, num_vars};
  }
  std::size_t bytes() const noexcept {
    return cells.capacity() * sizeof(State) + weights.capacity() * sizeof(double);
  }
};

// Streams a dataset as uniform-capacity minibatches, once per pass.
class MinibatchSource {
 public:
  virtual ~MinibatchSource() = default;
  virtual std::size_t num_vars() const = 0;
  virtual std::size_t minibatch_size() const = 0;
  virtual void rewind() = 0;
  // Fills `mb` with the next block; false at end of pass.
  virtual bool next(Minibatch& mb) = 0;
};

// Minibatches over an in-memory DataMatrix.
class MatrixMinibatchSource final : public MinibatchSource {
 public:
  MatrixMinibatchSource(const DataMatrix& data, std::size_t minibatch_size);

  std::size_t num_vars() const override { return data_.num_vars(); }
  std::size_t minibatch_size() const override { return size_; }
  void rewind() override { cursor_ = 0; }
  bool next(Minibatch& mb) override;

 private:
  const DataMatrix& data_;
  std::size_t size_;
  std::size_t cursor_ = 0;
};

}  // namespace samegibbs
