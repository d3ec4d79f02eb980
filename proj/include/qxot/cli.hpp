#pragma once

// Command-line front end: xot, linear, attack, leakage, qc.

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qxot::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,    // I/O and anything unexpected
  kUsage = 2,
  kCap = 3,        // scenario past the dense size caps
  kInvariant = 4,
};

struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// args excludes the program name. Reports go to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "0110" -> {0,1,1,0}; throws std::invalid_argument on anything else.
std::vector<int> parse_bits(const std::string& text);

}  // namespace qxot::cli
