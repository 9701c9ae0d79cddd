#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kchem/config.hpp"
#include "kchem/error.hpp"
#include "kchem/io.hpp"
#include "kchem/runner.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

kchem::ScenarioConfig load(std::string const& path, std::vector<std::string> const& overrides)
{
  auto cfg = kchem::load_config(path, overrides);
  if (cfg.run.workers == 0)
  {
    if (char const* env = std::getenv("KCHEM_WORKERS"))
    {
      char* end = nullptr;
      long const w = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || w < 1)
        throw kchem::ConfigError(kchem::ErrorCode::invalid_value, "KCHEM_WORKERS",
                                 "expected a positive integer, got '" + std::string(env) + "'");
      cfg.run.workers = static_cast<int>(w);
    }
  }
  return cfg;
}

void print_validation(kchem::ScenarioConfig const& cfg)
{
  std::cout << "config " << cfg.source_path << " hash " << cfg.hash << "\n";
  std::cout << "mode " << kchem::to_string(cfg.mode) << ", signal " << kchem::to_string(cfg.signal_mode) << "\n";
  for (auto const& h : cfg.validation.hypotheses)
  {
    std::cout << (h.passed ? "  ok    " : "  FAIL  ") << h.id;
    if (!h.witness.empty())
      std::cout << "  (" << h.witness << ")";
    std::cout << "\n";
  }
  std::cout << "kernel bound " << kchem::format_double(cfg.validation.kernel_bound) << "\n";
  std::cout << "rate sup " << kchem::format_double(cfg.validation.rate_sup) << "\n";
  std::cout << "signal bound " << kchem::format_double(cfg.signal_bound) << "\n";
  std::cout << "grid box y1 [" << cfg.grid_box.lo[0] << ", " << cfg.grid_box.hi[0] << "] y2 ["
            << cfg.grid_box.lo[1] << ", " << cfg.grid_box.hi[1] << "]\n";
  std::cout << "regimes:";
  auto const regimes = cfg.validation.regimes();
  if (regimes.empty())
    std::cout << " none";
  for (auto const& r : regimes)
    std::cout << " " << r;
  std::cout << "\n";
  for (auto const& n : cfg.notes)
    std::cout << "note: " << n << "\n";
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Kinetic chemotaxis simulator and bound monitor"};
  app.require_subcommand(1);
  std::vector<std::string> overrides;
  std::string config_path;
  std::string out_dir;
  std::string series;

  auto* run = app.add_subcommand("run", "Run a scenario and write its outputs");
  run->add_option("config", config_path, "Scenario file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--set", overrides, "Override section.key=value (repeatable)");

  auto* validate = app.add_subcommand("validate", "Parse a scenario and report the growth hypotheses");
  validate->add_option("config", config_path, "Scenario file")->required();
  validate->add_option("--set", overrides, "Override section.key=value (repeatable)");

  auto* bounds = app.add_subcommand("bounds", "Evaluate the bound ledger on a recorded moments series");
  bounds->add_option("config", config_path, "Scenario file")->required();
  bounds->add_option("--series", series, "moments.csv to check (default: run.series)");
  bounds->add_option("--out", out_dir, "Output directory")->required();
  bounds->add_option("--set", overrides, "Override section.key=value (repeatable)");

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::ParseError const& e)
  {
    int const code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try
  {
    if (*validate)
    {
      print_validation(load(config_path, overrides));
      return 0;
    }
    auto cfg = load(config_path, overrides);
    if (*bounds)
    {
      cfg.mode = kchem::RunMode::monitor;
      if (!series.empty())
        cfg.run.series = std::filesystem::absolute(series).string();
    }
    auto const summary = kchem::run_scenario(cfg, out_dir);
    std::cout << kchem::summary_json(summary) << "\n";
    return 0;
  }
  catch (kchem::ConfigError const& e)
  {
    for (auto const& i : e.issues())
      std::cerr << "config error " << kchem::to_string(i.code) << " at " << i.field << ": " << i.reason << "\n";
    return kConfigError;
  }
  catch (std::exception const& e)
  {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
