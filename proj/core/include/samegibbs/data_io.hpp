#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>

#include "samegibbs/data.hpp"

namespace samegibbs {

// Sparse coordinate text format:
//
//   %%MatrixMarket matrix coordinate integer general
//   <vars> <cases> <nnz>
//   <var> <case> <state>      (nnz lines, all 1-based)
//
// Lines starting with '%' are comments. Entries are written in case-major
// order; the streaming reader requires nondecreasing case indices.

void write_data_file(const std::filesystem::path& path, const DataMatrix& data);

// Throws Error{io_error} or Error{parse_error}.
DataMatrix read_data_file(const std::filesystem::path& path);

// Reads a data file one minibatch at a time without loading the full matrix.
class DataFileReader final : public MinibatchSource {
 public:
  DataFileReader(const std::filesystem::path& path, std::size_t minibatch_size);

  std::size_t num_vars() const override { return num_vars_; }
  std::size_t num_cases() const noexcept { return num_cases_; }
  std::size_t nnz() const noexcept { return nnz_; }
  std::size_t minibatch_size() const override { return size_; }
  void rewind() override;
  bool next(Minibatch& mb) override;

 private:
  bool read_entry(Entry& out);

  std::filesystem::path path_;
  std::ifstream in_;
  std::streampos body_start_;
  std::size_t body_line_ = 0;
  std::size_t line_ = 0;
  std::size_t num_vars_ = 0;
  std::size_t num_cases_ = 0;
  std::size_t nnz_ = 0;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
  std::size_t read_ = 0;
  std::size_t last_case_ = 0;
  std::optional<Entry> pending_;
};

}  // namespace samegibbs
