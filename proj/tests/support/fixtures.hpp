#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "samegibbs/error.hpp"
#include "samegibbs/network.hpp"
#include "samegibbs/network_io.hpp"

namespace samegibbs::testing {

inline std::filesystem::path data_dir() { return SAMEGIBBS_TEST_DATA_DIR; }

inline NetworkFile koller() { return load_network_file(data_dir() / "koller_student.json"); }

inline Network koller_structure() {
  const std::vector<Edge> edges{{0, 2}, {0, 3}, {1, 3}, {3, 4}};
  return Network::build({2, 2, 2, 3, 2}, edges);
}

inline Network chain3() {
  const std::vector<Edge> edges{{0, 1}, {1, 2}};
  return Network::build({2, 2, 2}, edges);
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("samegibbs_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace samegibbs::testing

// Asserts that `stmt` throws samegibbs::Error with the given code.
#define EXPECT_ERROR_CODE(stmt, expected_code)                                        \
  do {                                                                                 \
    try {                                                                              \
      stmt;                                                                            \
      ADD_FAILURE() << "expected " << samegibbs::to_string(expected_code);             \
    } catch (const samegibbs::Error& err__) {                                          \
      EXPECT_EQ(err__.code(), expected_code) << err__.what();                          \
    }                                                                                  \
  } while (0)
