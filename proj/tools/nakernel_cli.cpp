#include <nakernel/nakernel.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitError = 2;

struct ResultDeleter {
  void operator()(nak_result* r) const noexcept { nak_result_free(r); }
};
using ResultPtr = std::unique_ptr<nak_result, ResultDeleter>;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// --workers, then NAKERNEL_WORKERS, then 1
unsigned resolve_workers(std::optional<unsigned> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("NAKERNEL_WORKERS"); env && *env) {
    char* end = nullptr;
    const unsigned long w = std::strtoul(env, &end, 10);
    if (*end != '\0' || w == 0 || w > 4096)
      throw std::runtime_error("NAKERNEL_WORKERS must be a positive integer");
    return static_cast<unsigned>(w);
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> commands;
  for (size_t i = 0; const char* name = nak_command_name(i); ++i) commands.emplace_back(name);

  CLI::App app{"Simulation and verification of diffusion kernels on meta-abelian NA groups"};
  app.set_version_flag("--version", std::string(nak_version()));
  std::string command, config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  app.add_option("command", command, "Command to run")->required()->check(CLI::IsMember(commands));
  app.add_option("--config", config_path, "Config file (TOML) or a previous JSON result record")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--workers", workers, "Worker threads (default: NAKERNEL_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    const std::string text = config_path.empty() ? std::string() : read_file(config_path);
    nak_run_options opts{seed.has_value() ? 1 : 0, seed.value_or(0), resolve_workers(workers)};
    nak_result* raw = nullptr;
    const nak_status st = nak_run(command.c_str(), text.c_str(), &opts, &raw);
    if (st != NAK_OK) {
      std::cerr << "error (" << nak_status_name(st) << "): " << nak_last_error() << "\n";
      return kExitError;
    }
    const ResultPtr result(raw);
    const fs::path dir = out_dir.empty() ? fs::path(nak_result_out_dir(result.get())) : fs::path(out_dir);
    fs::create_directories(dir);
    write_file(dir / (command + ".csv"), nak_result_csv(result.get()));
    write_file(dir / (command + ".json"), nak_result_json(result.get()));
    const int code = nak_result_exit_code(result.get());
    std::cout << command << ": " << (code == 0 ? "all checks passed" : "some checks failed")
              << " (" << (dir / (command + ".csv")).string() << ")\n";
    return code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
