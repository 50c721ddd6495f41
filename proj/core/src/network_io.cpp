#include "samegibbs/network_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "samegibbs/error.hpp"

namespace samegibbs {
namespace {

using nlohmann::json;

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

[[noreturn]] void schema_fail(const std::string& what) {
  throw Error(ErrorCode::parse_error, "network file: " + what);
}

std::size_t as_index(const json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 0) schema_fail(std::string(what) + " must be a non-negative integer");
  return j.get<std::size_t>();
}

}  // namespace

NetworkFile parse_network_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error,
                "malformed JSON at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  if (!doc.is_object()) schema_fail("top level must be an object");
  if (!doc.contains("cardinalities") || !doc["cardinalities"].is_array()) {
    schema_fail("missing 'cardinalities' array");
  }
  if (doc.contains("parent_order") && doc["parent_order"] != "ascending") {
    schema_fail("unsupported parent_order (only \"ascending\")");
  }

  std::vector<std::size_t> cards;
  for (const auto& c : doc["cardinalities"]) cards.push_back(as_index(c, "cardinality"));
  std::vector<Edge> edges;
  if (doc.contains("edges")) {
    if (!doc["edges"].is_array()) schema_fail("'edges' must be an array");
    for (const auto& e : doc["edges"]) {
      if (!e.is_array() || e.size() != 2) schema_fail("each edge must be a [parent, child] pair");
      edges.push_back({as_index(e[0], "edge endpoint"), as_index(e[1], "edge endpoint")});
    }
  }

  NetworkFile out{Network::build(std::move(cards), edges), std::nullopt, {}};
  if (doc.contains("variables")) {
    for (const auto& name : doc["variables"]) {
      if (!name.is_string()) schema_fail("variable names must be strings");
      out.variable_names.push_back(name.get<std::string>());
    }
    if (out.variable_names.size() != out.network.num_vars()) schema_fail("'variables' length mismatch");
  }
  if (doc.contains("cpts") && !doc["cpts"].is_null()) {
    std::vector<std::vector<std::vector<double>>> rows;
    try {
      rows = doc["cpts"].get<std::vector<std::vector<std::vector<double>>>>();
    } catch (const json::exception& e) {
      schema_fail(std::string("'cpts' must be nested arrays of numbers: ") + e.what());
    }
    out.cpts = make_cpts(out.network, rows);
  }
  return out;
}

NetworkFile load_network_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open network file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_network_json(buffer.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::string to_network_json(const Network& net, const CptSet* cpts,
                            const std::vector<std::string>& variable_names) {
  json doc = json::object();
  if (!variable_names.empty()) doc["variables"] = variable_names;
  doc["cardinalities"] = std::vector<std::size_t>(net.cardinalities().begin(), net.cardinalities().end());
  json edges = json::array();
  for (const Edge& e : net.edges()) edges.push_back({e.parent, e.child});
  doc["edges"] = std::move(edges);
  doc["parent_order"] = "ascending";
  if (cpts != nullptr) {
    json tables = json::array();
    for (std::size_t v = 0; v < net.num_vars(); ++v) {
      json rows = json::array();
      for (std::size_t r = 0; r < net.num_parent_configs(v); ++r) {
        const auto row = cpts->row(v, r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
      }
      tables.push_back(std::move(rows));
    }
    doc["cpts"] = std::move(tables);
  }
  return doc.dump(2) + "\n";
}

void save_network_file(const std::filesystem::path& path, const Network& net, const CptSet* cpts,
                       const std::vector<std::string>& variable_names) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write network file " + path.string());
  out << to_network_json(net, cpts, variable_names);
  if (!out) throw Error(ErrorCode::io_error, "failed writing " + path.string());
}

}  // namespace samegibbs
