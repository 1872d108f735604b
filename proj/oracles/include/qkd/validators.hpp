#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qkd/config.hpp"

namespace qkd {

struct ValidatorCheck {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  int cases = 0;
  bool pass = false;
};

/// Compare library routines with the brute-force oracles on random and
/// configured inputs.
std::vector<ValidatorCheck> run_validators(const RunConfig& config);

/// `oracle` subcommand: writes oracle.json, exit 0 when every check passes.
int cmd_oracle(const RunConfig& config, std::ostream& out);

}  // namespace qkd
