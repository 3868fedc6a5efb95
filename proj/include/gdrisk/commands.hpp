#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gdrisk/config.hpp"

namespace gdrisk {

// Exit-code contract: 0 success, 1 verification failure, 2 config error,
// 3 numerical/stability error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericError = 3;

struct RunConfig {
  std::string command;       // spectrum | trajectory | bounds | table | scan | verify
  std::string config_path;   // optional; built-in defaults apply when empty
  std::string output_dir = ".";
  std::vector<std::string> overrides;  // section.key=value
  int threads = 0;                     // 0 = auto (hardware concurrency)
  std::optional<std::uint64_t> seed;   // overrides [instance] master_seed
};

// Dispatches a parsed command line; exceptions are mapped to the exit-code
// contract and reported on stderr.
int run_command(const RunConfig& rc);

}  // namespace gdrisk
