// Command line front end: one subcommand per experiment family, a JSON
// config, and a handful of overrides.  Exit codes: 0 success, 2 bad
// input, 3 numerical failure.  Errors go to stderr as a JSON report.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI/CLI.hpp>
#include <nlohmann/json.hpp>

#include "rqwalk/errors.hpp"
#include "rqwalk/experiment.hpp"

namespace {

void report_error(const char* type, const std::string& message) {
  nlohmann::json j{{"error", {{"type", type}, {"message", message}}}};
  std::cerr << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random quantum walk experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> threads_override;
  std::string out_override;

  for (const std::string& name : rqwalk::kSubcommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file (comments allowed)");
    sub->add_option("--seed", seed_override, "override master seed");
    sub->add_option("--threads", threads_override, "worker threads");
    sub->add_option("--out", out_override, "output directory for this run");
  }

  CLI11_PARSE(app, argc, argv);
  std::string name = app.get_subcommands().front()->get_name();

  try {
    rqwalk::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = rqwalk::ExperimentConfig::load(config_path);
    if (seed_override) cfg.master_seed = *seed_override;
    if (threads_override) {
      if (*threads_override < 1) throw rqwalk::ConfigError("--threads must be >= 1");
      cfg.threads = *threads_override;
    }
    if (!out_override.empty()) cfg.out_dir = out_override;

    auto dir = rqwalk::run_subcommand(name, cfg);
    std::cout << dir.string() << std::endl;
    return 0;
  } catch (const rqwalk::ConfigError& e) {
    report_error("config", e.what());
    return 2;
  } catch (const rqwalk::SolverError& e) {
    report_error("numerical", e.what());
    return 3;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return 3;
  }
}
