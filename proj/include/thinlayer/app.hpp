#pragma once

#include "thinlayer/config.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace thinlayer {

struct CommandOptions {
    std::string command;  ///< simulate, sweep-epsilon, attractor or verify
    std::filesystem::path config;
    std::filesystem::path out;
    std::optional<std::filesystem::path> record;  ///< verify: trajectory to audit
    std::optional<std::vector<double>> epsilons;   ///< sweep-epsilon / attractor override
    std::optional<double> t_end;                   ///< sweep-epsilon / simulate override
};

/// Default output directory name: <command>-YYYYmmdd-HHMMSS in the current
/// directory.
std::filesystem::path default_output_dir(const std::string& command);

/// Run one subcommand. Writes every output under options.out (created if
/// needed), including a copy of the configuration. Returns 0 on success and
/// 1 when a run errors or an enabled audit fails. Progress and the summary
/// go to `log`.
int dispatch(const CommandOptions& options, std::ostream& log);

}  // namespace thinlayer
