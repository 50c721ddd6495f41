#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "samegibbs/model.hpp"
#include "samegibbs/network.hpp"

namespace samegibbs {

// JSON network file:
//
//   {
//     "cardinalities": [2, 2, 3],
//     "edges": [[0, 2], [1, 2]],
//     "cpts": [ [[p, ...]], ..., [[row 0], [row 1], ...] ]   (optional)
//   }
//
// cpts[v][r][s] = Pr(X_v = s | parent configuration r), with parents in
// ascending index order and the last parent varying fastest. Optional
// "variables" names are carried through.
struct NetworkFile {
  Network network;
  std::optional<CptSet> cpts;
  std::vector<std::string> variable_names;
};

// Throws Error{parse_error} (with line information for malformed JSON) or any
// of the structural errors of Network::build.
NetworkFile parse_network_json(std::string_view text);
NetworkFile load_network_file(const std::filesystem::path& path);

std::string to_network_json(const Network& net, const CptSet* cpts,
                            const std::vector<std::string>& variable_names = {});
void save_network_file(const std::filesystem::path& path, const Network& net, const CptSet* cpts,
                       const std::vector<std::string>& variable_names = {});

}  // namespace samegibbs
