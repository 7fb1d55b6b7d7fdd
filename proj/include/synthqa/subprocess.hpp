#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace synthqa {

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  bool launched = false;
  double seconds = 0.0;
  std::string error;

  bool ok() const { return launched && !timed_out && exit_code == 0; }
};

// Runs argv[0] (PATH lookup) in its own process group with stdout and stderr
// appended to `log_path`. On timeout the whole group is killed. A timeout of
// zero or less means no limit.
ProcessResult run_process(const std::vector<std::string>& argv, double timeout_seconds,
                          const std::filesystem::path& log_path);

// Splits on runs of whitespace; no quoting.
std::vector<std::string> split_command(const std::string& command);

}  // namespace synthqa
