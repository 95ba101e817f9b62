#include "experiment/record.hpp"

#include <charconv>
#include <cmath>

#include "error.hpp"

#ifndef NAKERNEL_VERSION
#define NAKERNEL_VERSION "0.1.0"
#endif

namespace nak::experiment {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::string format_bool(bool b) { return b ? "true" : "false"; }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string to_csv(const CommandResult& r) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out.push_back(',');
      out += csv_field(fields[i]);
    }
    out.push_back('\n');
  };
  line(r.header);
  for (const auto& row : r.rows) {
    require(row.size() == r.header.size(), "csv: row width differs from header");
    line(row);
  }
  return out;
}

const char* version() noexcept { return NAKERNEL_VERSION; }

nlohmann::ordered_json to_record(const CommandResult& r, const ExperimentConfig& cfg,
                                 unsigned workers, double wall_seconds) {
  nlohmann::ordered_json j;
  j["command"] = r.command;
  j["version"] = version();
  j["config_hash"] = config_hash(cfg.text);
  j["seed"] = cfg.seed;
  j["workers"] = workers;
  j["wall_time_s"] = wall_seconds;
  j["passed"] = r.passed;
  j["csv"] = r.command + ".csv";
  j["rows"] = r.rows.size();
  j["summary"] = r.summary;
  j["config_text"] = cfg.text;
  return j;
}

std::optional<Replay> parse_record(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  if (i == text.size() || text[i] != '{') return std::nullopt;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("result record is not valid JSON: ") + e.what());
  }
  if (!j.contains("config_text") || !j["config_text"].is_string() || !j.contains("seed") ||
      !j["seed"].is_number_unsigned())
    fail(ErrorCode::ConfigError, "result record lacks config_text or seed");
  return Replay{j["config_text"].get<std::string>(), j["seed"].get<std::uint64_t>()};
}

}  // namespace nak::experiment
