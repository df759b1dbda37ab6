// oamx: run, validate and list the experiment scenarios.
//
//   oamx run <config> [--seed N] [--mode analytic|sampled] [--out DIR] [--format json|csv]
//   oamx validate <config>
//   oamx list-scenarios
//   oamx version
//
// Exit codes: 0 success, 1 validation error, 2 runtime or convergence error.
// OAMX_OUT_DIR sets the default output directory. Without one, JSON goes to stdout.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "oamx/errors.hpp"
#include "oamx/harness/config.hpp"
#include "oamx/harness/report.hpp"
#include "oamx/harness/run.hpp"
#include "oamx/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string out;
  std::string format = "json";
};

int run(const RunArgs& args) {
  using namespace oamx::harness;
  json doc = read_json_file(args.config);
  if (doc.is_object()) {
    if (args.seed) doc["seed"] = *args.seed;
    if (!args.mode.empty()) doc["mode"] = args.mode;
  }
  const ExperimentConfig cfg = parse_config(doc);
  const Format format = args.format == "csv" ? Format::Csv : Format::Json;

  std::string out = args.out;
  if (out.empty())
    if (const char* env = std::getenv("OAMX_OUT_DIR")) out = env;

  const ResultsReport report = run_scenario(cfg);
  if (out.empty()) {
    if (format == Format::Csv)
      throw oamx::ValidationError("--format csv writes several files; give --out or set OAMX_OUT_DIR");
    std::cout << emit_report(report, format).front().content;
    return kExitOk;
  }
  for (const auto& path : write_report(report, format, out)) std::cerr << "wrote " << path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and analysis toolkit for OAM photonic qubit experiments"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario config and emit a report");
  run_cmd->add_option("config", run_args.config, "Scenario config (JSON)")->required();
  run_cmd->add_option("--seed", run_args.seed, "Override the config seed");
  run_cmd->add_option("--mode", run_args.mode, "Override the config mode")
      ->check(CLI::IsMember({"analytic", "sampled"}));
  run_cmd->add_option("--out", run_args.out, "Output directory (default $OAMX_OUT_DIR)");
  run_cmd->add_option("--format", run_args.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}));

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a config without running it");
  validate_cmd->add_option("config", validate_path, "Scenario config (JSON)")->required();

  auto* list_cmd = app.add_subcommand("list-scenarios", "Print the known scenario names");
  auto* version_cmd = app.add_subcommand("version", "Print the toolkit version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*run_cmd) return run(run_args);
    if (*validate_cmd) {
      oamx::harness::load_config(validate_path);
      std::cout << "ok\n";
      return kExitOk;
    }
    if (*list_cmd) {
      for (const auto& [_, name] : oamx::harness::scenario_names()) std::cout << name << "\n";
      return kExitOk;
    }
    if (*version_cmd) {
      std::cout << oamx::kToolkitName << " " << oamx::kVersion << "\n";
      return kExitOk;
    }
  } catch (const oamx::ValidationError& e) {
    std::cerr << "validation error:\n";
    for (const auto& issue : e.issues()) std::cerr << "  " << issue << "\n";
    return kExitValidation;
  } catch (const oamx::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
