#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "triage/config.hpp"

namespace triage {

// Runs one command line (without the program name) and returns the process
// exit code: 0 success, 1 validation or usage error, 2 runtime or transport
// error. Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const EnvLookup& env = process_env);

}  // namespace triage
