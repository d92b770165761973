#pragma once

#include "mosco/domain.hpp"
#include "mosco/forms.hpp"
#include "mosco/kernel.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mosco {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double tail_tol = 1e-10;
  double matrix_tol = 1e-3;
  double mosco_tol = 5e-3;
  double solver_tol = 1e-10;
  double quad_tol = 1e-8;
  double bbm_tol = 1e-3;
  double cross_tol = 1e-2;
  double liminf_tol = 5e-3;
};

struct ExperimentConfig {
  int spec_version = 1;
  std::string name;
  std::string experiment;
  std::optional<DomainSpec> domain;
  KernelParams kernel;
  Basis basis = Basis::P1;
  std::vector<double> alpha_sweep{1.5, 1.9, 1.99, 1.999};
  nlohmann::json function = {{"kind", "linear"}};
  Tolerances tol;
  PairQuadrature quadrature;
  std::uint64_t seed = 0;
  nlohmann::json params = nlohmann::json::object();
};

const std::vector<std::string>& experiment_kinds();

// Throws ConfigError on malformed or invalid input.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// Builds the domain and kernel once so that parameter errors surface as ConfigError.
void validate_config(const ExperimentConfig& config);

// Builds u from a function description such as {"kind": "bump", "centre": [0.5], "radius": 0.75}.
ScalarField make_function(const nlohmann::json& spec, int dim);

struct Assertion {
  std::string id;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
};

enum ExitCode { kExitPass = 0, kExitAssertion = 1, kExitConfig = 2, kExitNumerical = 3 };

struct ExperimentResult {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<Assertion> assertions;
  nlohmann::json details = nlohmann::json::object();
  int exit_code = kExitPass;
  std::string status = "pass";
  std::string reason;
};

// Runs the experiment; never throws for configuration or numerical problems,
// which are reported through exit_code and reason instead.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::string format_number(double v);
std::string render_csv(const ExperimentResult& result);
nlohmann::json render_summary(const ExperimentConfig& config, const ExperimentResult& result);
// Writes <out_dir>/<name>.csv and <out_dir>/<name>.summary.json.
void write_artifacts(const std::string& out_dir, const std::string& name, const ExperimentConfig* config,
                     const ExperimentResult& result);

std::string catalog_text();

}  // namespace mosco
