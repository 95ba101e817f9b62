#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "experiment/config.hpp"
#include "json.hpp"

namespace nak::experiment {

// Tabular payload plus command-specific summary of one command run.
struct CommandResult {
  std::string command;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  bool passed = true;
};

// Shortest decimal that round-trips to the same double.
std::string format_double(double x);
std::string format_bool(bool b);

std::string csv_field(std::string_view s);
std::string to_csv(const CommandResult& r);

const char* version() noexcept;

nlohmann::ordered_json to_record(const CommandResult& r, const ExperimentConfig& cfg,
                                 unsigned workers, double wall_seconds);

// Embedded config and seed of a result record, when `text` is one.
struct Replay {
  std::string config_text;
  std::uint64_t seed = 0;
};

std::optional<Replay> parse_record(std::string_view text);

}  // namespace nak::experiment
