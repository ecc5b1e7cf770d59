#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ffitts/datamodel.hpp"

namespace ffitts::testing {

inline TrialRecord tap(Condition c, int trial, double dx, double dy, double mt = 300.0, int tap_index = 1,
                       std::string participant = "p1") {
  TrialRecord t;
  t.participant_id = std::move(participant);
  t.block = 1;
  t.trial = trial;
  t.condition = c;
  t.target_x_mm = 0.0;
  t.target_y_mm = c.amplitude_mm;
  t.touch_x_mm = dx;
  t.touch_y_mm = c.amplitude_mm + dy;
  t.mt_ms = mt;
  t.tap_index = tap_index;
  return t;
}

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ffitts_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ffitts::testing
