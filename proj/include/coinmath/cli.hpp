#pragma once

#include <ostream>

#include "coinmath/config.hpp"

namespace coinmath::cli {

// Exit status for a run interrupted by Ctrl-C after partial artifacts were flushed.
inline constexpr int kExitCancelled = 130;

// Parses argv and runs one subcommand: audit, transform, ensemble, mix, eval,
// grade, report. Returns the process exit status (0 ok, 1 usage, 2 data,
// 3 provider, 4 sandbox). Never throws.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
             const config::EnvLookup& env = config::process_env());

}  // namespace coinmath::cli
