#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gdrisk {

struct CheckResult {
  std::string name;
  double tolerance = 0.0;
  double observed = 0.0;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t master_seed = 8675309;
  // Multiplies the default learning rate; values above the stability budget
  // are a deliberate negative control and make the trajectory checks fail.
  double lr_scale = 1.0;
  // Empty list means "all checks".
  std::vector<std::string> checks;
};

// Cross-module oracle suite: closed form against the literal GD recursion,
// pseudoinverse identities, the risk decomposition inequality, the
// σ(1-σ)^t ≤ 1/t grid bound, and exact risk against fresh-sample Monte Carlo.
std::vector<CheckResult> run_verification(const VerifyOptions& options);

std::vector<std::string> verification_check_names();

}  // namespace gdrisk
