#include "samegibbs/data.hpp"

#include <algorithm>
#include <string>

#include "samegibbs/error.hpp"

namespace samegibbs {
namespace {

bool entry_less(const Entry& a, const Entry& b) {
  return a.case_index != b.case_index ? a.case_index < b.case_index : a.var < b.var;
}

}  // namespace

DataMatrix::DataMatrix(std::size_t num_vars, std::size_t num_cases, std::vector<Entry> entries)
    : num_vars_(num_vars), num_cases_(num_cases), entries_(std::move(entries)) {
  if (!std::is_sorted(entries_.begin(), entries_.end(), entry_less))
    std::sort(entries_.begin(), entries_.end(), entry_less);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    if (e.var >= num_vars_ || e.case_index >= num_cases_ || e.state == kMissing) {
      throw Error(ErrorCode::invalid_index, "entry (" + std::to_string(e.var) + ", " +
                                                std::to_string(e.case_index) + ") out of range");
    }
    if (i > 0 && entries_[i - 1].var == e.var && entries_[i - 1].case_index == e.case_index) {
      throw Error(ErrorCode::invalid_index, "duplicate entry (" + std::to_string(e.var) + ", " +
                                                std::to_string(e.case_index) + ")");
    }
  }
}

double DataMatrix::density() const noexcept {
  const double cells = static_cast<double>(num_vars_) * static_cast<double>(num_cases_);
  return cells > 0.0 ? static_cast<double>(entries_.size()) / cells : 0.0;
}

std::optional<State> DataMatrix::at(VarIndex var, std::size_t case_index) const {
  const Entry probe{var, case_index, 0};
  auto it = std::lower_bound(entries_.begin(), entries_.end(), probe, entry_less);
  if (it != entries_.end() && it->var == var && it->case_index == case_index) return it->state;
  return std::nullopt;
}

std::span<const Entry> DataMatrix::case_range(std::size_t first, std::size_t last) const {
  auto by_case = [](const Entry& e, std::size_t c) { return e.case_index < c; };
  auto lo = std::lower_bound(entries_.begin(), entries_.end(), first, by_case);
  auto hi = std::lower_bound(lo, entries_.end(), last, by_case);
  return {lo, hi};
}

void DataMatrix::validate_against(const Network& net) const {
  if (num_vars_ != net.num_vars()) {
    throw Error(ErrorCode::dimension_mismatch, "data has " + std::to_string(num_vars_) +
                                                   " variables, network has " +
                                                   std::to_string(net.num_vars()));
  }
  for (const Entry& e : entries_) {
    if (e.state >= net.cardinality(e.var)) {
      throw Error(ErrorCode::dimension_mismatch,
                  "state " + std::to_string(e.state) + " of variable " + std::to_string(e.var) +
                      " exceeds cardinality " + std::to_string(net.cardinality(e.var)));
    }
  }
}

void Minibatch::reset(std::size_t vars, std::size_t cap, std::size_t first) {
  num_vars = vars;
  capacity = cap;
  first_case = first;
  num_cases = 0;
  cells.assign(vars * cap, kMissing);
  weights.assign(cap, 0.0);
}

MatrixMinibatchSource::MatrixMinibatchSource(const DataMatrix& data, std::size_t minibatch_size)
    : data_(data), size_(minibatch_size) {
  if (size_ == 0) throw Error(ErrorCode::invalid_config, "minibatch size must be positive");
}

bool MatrixMinibatchSource::next(Minibatch& mb) {
  if (cursor_ >= data_.num_cases()) return false;
  mb.reset(data_.num_vars(), size_, cursor_);
  mb.num_cases = std::min(size_, data_.num_cases() - cursor_);
  std::fill_n(mb.weights.begin(), mb.num_cases, 1.0);
  for (const Entry& e : data_.case_range(cursor_, cursor_ + mb.num_cases))
    mb.cells[(e.case_index - cursor_) * mb.num_vars + e.var] = e.state;
  cursor_ += size_;
  return true;
}

}  // namespace samegibbs
