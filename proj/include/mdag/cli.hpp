#ifndef MDAG_CLI_HPP
#define MDAG_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace mdag {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,            ///< success; for fit/sweep every solve proven optimal
    kExitFailure = 1,       ///< unexpected internal failure
    kExitInputError = 2,    ///< bad flags, config, manifest, cache or data
    kExitGapLimited = 3,    ///< a limit stopped a solve; the incumbent was written with its gap
    kExitNumericalError = 4,
    kExitCapacityError = 5,
};

/// Runs one command (args exclude the program name). Diagnostics go to `err`,
/// summaries to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Built-in defaults of every configuration key.
nlohmann::json default_run_config();

}  // namespace mdag

#endif  // MDAG_CLI_HPP
