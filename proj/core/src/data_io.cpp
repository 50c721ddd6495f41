#include "samegibbs/data_io.hpp"

#include <charconv>
#include <string>
#include <string_view>

#include "samegibbs/error.hpp"

namespace samegibbs {
namespace {

constexpr std::string_view kBanner = "%%MatrixMarket matrix coordinate integer general";

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::parse_error, path.string() + ":" + std::to_string(line) + ": " + what);
}

// Parses exactly three unsigned integers separated by blanks.
bool parse_triple(std::string_view s, std::size_t (&out)[3]) {
  const char* p = s.data();
  const char* end = s.data() + s.size();
  for (auto& value : out) {
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    auto [next, ec] = std::from_chars(p, end, value);
    if (ec != std::errc{} || next == p) return false;
    p = next;
  }
  while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
  return p == end;
}

bool is_comment_or_blank(std::string_view s) {
  for (char c : s) {
    if (c == '%') return true;
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open data file " + path.string());
  return in;
}

// Reads up to the header line; returns (vars, cases, nnz).
void read_header(std::istream& in, const std::filesystem::path& path, std::size_t& line,
                 std::size_t (&header)[3]) {
  std::string text;
  while (std::getline(in, text)) {
    ++line;
    if (is_comment_or_blank(text)) continue;
    if (!parse_triple(text, header)) parse_fail(path, line, "expected header 'vars cases nnz'");
    return;
  }
  parse_fail(path, line, "missing header line");
}

Entry to_entry(const std::filesystem::path& path, std::size_t line, const std::size_t (&t)[3],
               std::size_t vars, std::size_t cases) {
  if (t[0] < 1 || t[0] > vars) parse_fail(path, line, "variable index out of range");
  if (t[1] < 1 || t[1] > cases) parse_fail(path, line, "case index out of range");
  if (t[2] < 1 || t[2] >= kMissing) parse_fail(path, line, "state must be a positive 1-based value");
  return {t[0] - 1, t[1] - 1, static_cast<State>(t[2] - 1)};
}

}  // namespace

void write_data_file(const std::filesystem::path& path, const DataMatrix& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write data file " + path.string());
  out << kBanner << '\n' << data.num_vars() << ' ' << data.num_cases() << ' ' << data.nnz() << '\n';
  std::string buffer;
  buffer.reserve(1 << 16);
  char tmp[64];
  for (const Entry& e : data.entries()) {
    const std::size_t fields[3] = {e.var + 1, e.case_index + 1, static_cast<std::size_t>(e.state) + 1};
    for (int k = 0; k < 3; ++k) {
      auto [end, ec] = std::to_chars(tmp, tmp + sizeof tmp, fields[k]);
      buffer.append(tmp, end);
      buffer.push_back(k < 2 ? ' ' : '\n');
    }
    if (buffer.size() > (1 << 16) - 128) {
      out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
      buffer.clear();
    }
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  if (!out) throw Error(ErrorCode::io_error, "failed writing " + path.string());
}

DataMatrix read_data_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::size_t line = 0;
  std::size_t header[3];
  read_header(in, path, line, header);
  std::vector<Entry> entries;
  entries.reserve(header[2]);
  std::string text;
  std::size_t triple[3];
  while (std::getline(in, text)) {
    ++line;
    if (is_comment_or_blank(text)) continue;
    if (!parse_triple(text, triple)) parse_fail(path, line, "expected 'var case state'");
    entries.push_back(to_entry(path, line, triple, header[0], header[1]));
  }
  if (entries.size() != header[2]) {
    parse_fail(path, line, "header declares " + std::to_string(header[2]) + " entries, found " +
                               std::to_string(entries.size()));
  }
  try {
    return DataMatrix(header[0], header[1], std::move(entries));
  } catch (const Error& e) {
    throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
  }
}

DataFileReader::DataFileReader(const std::filesystem::path& path, std::size_t minibatch_size)
    : path_(path), in_(open_input(path)), size_(minibatch_size) {
  if (size_ == 0) throw Error(ErrorCode::invalid_config, "minibatch size must be positive");
  std::size_t header[3];
  read_header(in_, path_, line_, header);
  num_vars_ = header[0];
  num_cases_ = header[1];
  nnz_ = header[2];
  body_start_ = in_.tellg();
  body_line_ = line_;
}

void DataFileReader::rewind() {
  in_.clear();
  in_.seekg(body_start_);
  line_ = body_line_;
  cursor_ = 0;
  read_ = 0;
  last_case_ = 0;
  pending_.reset();
}

bool DataFileReader::read_entry(Entry& out) {
  if (pending_) {
    out = *pending_;
    pending_.reset();
    return true;
  }
  std::string text;
  std::size_t triple[3];
  while (std::getline(in_, text)) {
    ++line_;
    if (is_comment_or_blank(text)) continue;
    if (!parse_triple(text, triple)) parse_fail(path_, line_, "expected 'var case state'");
    out = to_entry(path_, line_, triple, num_vars_, num_cases_);
    if (out.case_index < last_case_) {
      parse_fail(path_, line_, "entries must be sorted by case for streaming");
    }
    last_case_ = out.case_index;
    ++read_;
    return true;
  }
  if (read_ != nnz_) {
    parse_fail(path_, line_, "header declares " + std::to_string(nnz_) + " entries, found " +
                                 std::to_string(read_));
  }
  return false;
}

bool DataFileReader::next(Minibatch& mb) {
  if (cursor_ >= num_cases_) return false;
  mb.reset(num_vars_, size_, cursor_);
  mb.num_cases = std::min(size_, num_cases_ - cursor_);
  std::fill_n(mb.weights.begin(), mb.num_cases, 1.0);
  const std::size_t end = cursor_ + mb.num_cases;
  Entry e{};
  while (read_entry(e)) {
    if (e.case_index >= end) {
      pending_ = e;
      break;
    }
    State& cell = mb.cells[(e.case_index - cursor_) * num_vars_ + e.var];
    if (cell != kMissing) parse_fail(path_, line_, "duplicate entry");
    cell = e.state;
  }
  cursor_ += size_;
  return true;
}

}  // namespace samegibbs
