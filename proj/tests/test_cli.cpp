#include "mosco/experiment.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace mosco;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mosco_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const fs::path& capture = {}) {
  std::string cmd = std::string(MOSCO_CLI_PATH) + " " + args;
  cmd += capture.empty() ? " > /dev/null 2>&1" : " > " + capture.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config(const std::string& name) { return std::string(MOSCO_CONFIG_DIR) + "/" + name; }

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config(R"({"spec_version": 1, "name": "t", "experiment": "bbm_limit",
      "domain": {"dim": 1, "bounds": [0, 1], "n": 4}, "kernel": {"kind": "j1"}})");
  CHECK(c.name == "t");
  CHECK(c.kernel.kind == KernelKind::J1);
  CHECK(c.alpha_sweep == std::vector<double>{1.5, 1.9, 1.99, 1.999});
  CHECK(c.domain->n == 4);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"spec_version": 1, "name": "t", "experiment": "bbm_limit", "colour": 1})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"spec_version": 1, "name": "t", "experiment": "nope"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"spec_version": 1, "name": "t", "experiment": "check_kernel",
      "kernel": {"kind": "nu"}, "alpha_sweep": [1.9, 1.5]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"spec_version": 1, "name": "t", "experiment": "bbm_limit",
      "kernel": {"kind": "nu"}})"),
                  ConfigError);
}

TEST_CASE("function descriptions") {
  const auto lin = make_function({{"kind", "linear"}, {"coeffs", {2.0, -1.0}}, {"offset", 0.5}}, 2);
  CHECK(lin(make_point(1.0, 1.0)) == doctest::Approx(1.5));
  const auto half = make_function({{"kind", "half_indicator"}, {"split", 0.5}}, 1);
  CHECK(half(make_point(0.25)) + half(make_point(0.75)) == doctest::Approx(1.0));
  const auto bump = make_function({{"kind", "bump"}, {"centre", {0.5}}, {"radius", 0.25}}, 1);
  CHECK(bump(make_point(0.8)) == 0.0);
  CHECK(bump(make_point(0.5)) > 0.0);
  CHECK_THROWS_AS(make_function({{"kind", "spline"}}, 1), ConfigError);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("run exits 0 and writes artifacts") {
  const auto out = scratch("bbm");
  CHECK(run_cli("run " + config("bbm_1d.json") + " --out " + out.string()) == 0);
  const auto csv = read_file(out / "bbm_1d.csv");
  CHECK(csv.rfind("experiment,alpha,value,error_estimate,tail_bound,inner_part,cross_part\n", 0) == 0);
  const auto summary = nlohmann::json::parse(read_file(out / "bbm_1d.summary.json"));
  CHECK(summary["exit_code"] == 0);
  CHECK(summary["status"] == "pass");
  CHECK(summary["seed"].is_number());
}

TEST_CASE("identical runs produce byte-identical output") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  CHECK(run_cli("--jobs 1 run " + config("cross_term_1d.json") + " --out " + a.string()) == 0);
  CHECK(run_cli("run " + config("cross_term_1d.json") + " --jobs 3 --out " + b.string()) == 0);
  CHECK(read_file(a / "cross_term_1d.csv") == read_file(b / "cross_term_1d.csv"));
  CHECK_FALSE(read_file(a / "cross_term_1d.csv").empty());
}

TEST_CASE("assertion failures exit 1 with a witness") {
  const auto out = scratch("violator");
  CHECK(run_cli("run " + config("check_violator.json") + " --out " + out.string()) == 1);
  const auto summary = nlohmann::json::parse(read_file(out / "check_violator.summary.json"));
  CHECK(summary["exit_code"] == 1);
  CHECK(summary["details"].dump().find("witness") != std::string::npos);
}

TEST_CASE("malformed configs exit 2") {
  const auto out = scratch("bad");
  const auto bad = out / "broken.json";
  std::ofstream(bad) << "{\"spec_version\": 1, \"name\": \"broken\", \"experiment\": \"bbm_limit\",";
  CHECK(run_cli("run " + bad.string() + " --out " + out.string()) == 2);
  CHECK(fs::exists(out / "broken.summary.json"));
  CHECK(run_cli("validate " + bad.string()) == 2);
  CHECK(run_cli("validate " + config("bbm_1d.json")) == 0);
  CHECK(run_cli("run " + (out / "missing.json").string() + " --out " + out.string()) == 2);
  CHECK(run_cli("frobnicate") == 2);
}

TEST_CASE("catalog lists families and is deterministic") {
  const auto dir = scratch("catalog");
  CHECK(run_cli("catalog", dir / "a.txt") == 0);
  CHECK(run_cli("catalog", dir / "b.txt") == 0);
  const auto text = read_file(dir / "a.txt");
  CHECK(text == read_file(dir / "b.txt"));
  CHECK(text.find("power_law") != std::string::npos);
  CHECK(text.find("j4") != std::string::npos);
  CHECK(text == catalog_text());
}
