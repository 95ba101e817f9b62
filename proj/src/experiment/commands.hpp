#pragma once

#include <string>
#include <vector>

#include "experiment/config.hpp"
#include "experiment/record.hpp"

namespace nak::experiment {

const std::vector<std::string>& command_names();

// Runs one command. Check failures end up in the result; invalid input and
// runtime failures throw nak::Error.
CommandResult run_command(const std::string& name, const ExperimentConfig& cfg, unsigned workers);

}  // namespace nak::experiment
