#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ccsim/engine.hpp"
#include "ccsim/profiles.hpp"
#include "ccsim/traffic.hpp"
#include "replay_oracle.hpp"

namespace fixtures {

std::filesystem::path source_path(const std::string& relative);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

/// Runs the ccsim binary with `args`; returns its exit code. Output is discarded.
int run_cli(const std::string& args);
/// As run_cli, also capturing stdout and stderr (interleaved) into `output`.
int run_cli(const std::string& args, std::string& output);

/// Two models A and B with curve [[1,4],[2,6]], 10 s loads and 10 ms unloads.
ccsim::CostModel oracle_cost_model();

ccsim::ArrivalTrace make_trace(const std::vector<std::pair<double, std::string>>& arrivals,
                               double duration_s = 1200.0);

/// Converts a reference instance into library inputs and runs the engine.
ccsim::RunResult run_engine(const oracle::Instance& inst);

/// Empty string when the engine and the reference interpreter agree exactly.
std::string compare_with_oracle(const oracle::Instance& inst);

}  // namespace fixtures
