#include "mosco/experiment.hpp"
#include "mosco/parallel.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>
#include <optional>

namespace {

std::string stem_of(const std::string& path) { return std::filesystem::path(path).stem().string(); }

int report(const mosco::ExperimentResult& r) {
  for (const auto& a : r.assertions)
    fmt::print("{:<4} {}  value={}  tolerance={}\n", a.passed ? "ok" : "FAIL", a.id, mosco::format_number(a.value),
               mosco::format_number(a.tolerance));
  if (r.exit_code != mosco::kExitPass) fmt::print(stderr, "{}: {}\n", r.status, r.reason);
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal-to-local form experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  int jobs = 1;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  app.add_option("--jobs", jobs, "Worker threads for assembly (0 = all cores)");
  app.add_option("--out", out_dir, "Directory for CSV and summary files");
  app.add_option("--seed", seed, "Override the config seed");

  std::string run_path, validate_path;
  auto* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("config", run_path, "Config file")->required();
  auto* catalog = app.add_subcommand("catalog", "List mollifier families, kernels and experiments");
  auto* validate = app.add_subcommand("validate", "Parse and check a config without running it");
  validate->add_option("config", validate_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mosco::kExitConfig;
  }
  mosco::set_default_jobs(jobs);

  if (catalog->parsed()) {
    fmt::print("{}", mosco::catalog_text());
    return 0;
  }

  const std::string& path = run->parsed() ? run_path : validate_path;
  mosco::ExperimentConfig config;
  try {
    config = mosco::load_config(path);
    if (seed) {
      config.seed = *seed;
      config.kernel.seed = *seed;
    }
    mosco::validate_config(config);
  } catch (const mosco::ConfigError& e) {
    mosco::ExperimentResult r;
    r.exit_code = mosco::kExitConfig;
    r.status = "config_error";
    r.reason = e.what();
    if (run->parsed()) {
      try {
        mosco::write_artifacts(out_dir, stem_of(path), nullptr, r);
      } catch (const std::exception&) {
      }
    }
    fmt::print(stderr, "config_error: {}\n", e.what());
    return mosco::kExitConfig;
  }

  if (validate->parsed()) {
    fmt::print("{}: valid {} config\n", config.name, config.experiment);
    return 0;
  }

  const auto result = mosco::run_experiment(config);
  try {
    mosco::write_artifacts(out_dir, config.name, &config, result);
  } catch (const std::exception& e) {
    fmt::print(stderr, "cannot write artifacts: {}\n", e.what());
    return mosco::kExitConfig;
  }
  return report(result);
}
