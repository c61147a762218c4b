#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "gipsp/acceptance.hpp"
#include "gipsp/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Gauge-independent Wigner and Husimi phase-space toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config;
  std::string out;
  std::size_t threads = 1;
  double scale = 1.0;
  app.add_option("--threads", threads, "worker threads for transforms and right-hand sides")
      ->check(CLI::PositiveNumber);
  app.add_option("--tolerance-scale", scale, "multiplier applied to every tolerance")->check(CLI::PositiveNumber);

  auto* run = app.add_subcommand("run", "run a scenario and write arrays, CSV slices and report.json");
  run->add_option("--config,config", config, "scenario JSON file")->required();
  run->add_option("--out", out, "output directory (overrides output.dir)");

  auto* report = app.add_subcommand("report", "print the summary table of a run directory");
  report->add_option("--out,dir", out, "run directory")->required();

  auto* selftest = app.add_subcommand("selftest", "run the acceptance criteria");
  std::vector<int> only;
  selftest->add_option("--only", only, "criterion ids to run");

  CLI11_PARSE(app, argc, argv);
  gipsp::set_threads(threads);

  try {
    if (*run) {
      gipsp::ScenarioConfig cfg;
      try {
        cfg = gipsp::load_config(config);
      } catch (const gipsp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
      }
      if (!out.empty()) cfg.output_dir = out;
      const auto result = gipsp::run_scenario(cfg, scale, &std::cerr);
      std::cout << gipsp::report_table(cfg.output_dir);
      return result.exit_code;
    }
    if (*report) {
      std::cout << gipsp::report_table(out);
      return 0;
    }
    if (*selftest) {
      const auto results = gipsp::run_acceptance(scale, only, &std::cout);
      bool ok = true;
      for (const auto& r : results) ok = ok && r.pass();
      return ok ? 0 : 1;
    }
  } catch (const gipsp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
