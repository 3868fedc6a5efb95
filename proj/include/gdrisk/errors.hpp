#pragma once

#include <stdexcept>
#include <string>

namespace gdrisk {

// Bad user input: unknown family names, malformed config files, invalid
// shape parameters. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: divergence, rank deficiency, non-terminating scans.
// Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Learning rate outside the stable range for the sampled design matrix.
class StabilityError : public NumericError {
 public:
  explicit StabilityError(const std::string& what) : NumericError(what) {}
};

// A sampled design matrix violated the full-rank assumption.
class RankDeficientError : public NumericError {
 public:
  explicit RankDeficientError(const std::string& what) : NumericError(what) {}
};

}  // namespace gdrisk
