#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gipsp/dynamics.hpp"

namespace gipsp {

/// Malformed or out-of-range scenario configuration. The message names the
/// offending field by its JSON path.
class ConfigError : public Error {
public:
  using Error::Error;
};

struct Tolerances {
  double norm = 1e-10;
  double gauge_invariance = 1e-8;
  double reduction = 1e-12;
  double round_trip = 1e-10;
  double husimi_round_trip = 1e-5;
  double husimi_total = 1e-6;
  double positivity = 1e-10;
  double imaginary = 1e-12;
  double mass = 1e-6;
  double gauge_dynamics = 1e-6;
};

struct ScenarioConfig {
  std::string name = "scenario";
  QGrid grid;
  Constants constants;
  GaugeField field;
  /// Applied to field and state before anything else.
  std::optional<GaugeFn> gauge_transform;
  /// When present, every gauge-independent transform is recomputed in the
  /// gauge shifted by chi and compared.
  std::optional<GaugeFn> chi;
  nlohmann::json state;
  std::vector<Kind> transforms;
  SmoothingSpec smoothing;
  std::optional<EvolutionSpec> evolution;
  std::size_t snapshot_stride = 0;
  Tolerances tolerances;
  std::filesystem::path output_dir = "gipsp-out";
  bool csv = true;
  /// Resolved configuration, copied into the output directory.
  nlohmann::json source;
};

/// Throws ConfigError.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& file);

/// Builds the configured state in the gauge of `field`.
DensityMatrix build_state(const nlohmann::json& spec, const QGrid& grid, const Constants& k, const GaugeField& field,
                          WaveFunction* pure = nullptr);

struct Check {
  std::string name;
  double value = 0.0;
  std::optional<double> tolerance;
  std::string note;

  bool pass() const { return !tolerance || value <= *tolerance; }
};

struct RunResult {
  int exit_code = 0;
  std::vector<Check> checks;
  nlohmann::json report;
};

/// Runs transforms, checks and the optional evolution; writes arrays, CSV
/// slices, config.json and report.json into cfg.output_dir. Exit code 1 when
/// any check fails.
RunResult run_scenario(const ScenarioConfig& cfg, double tolerance_scale = 1.0, std::ostream* log = nullptr);

/// Files every completed run directory contains.
std::vector<std::string> expected_artifacts();

/// Fixed-width summary of a run directory: checks in report order, then
/// runtimes. Throws Error naming the missing files when artifacts are absent.
std::string report_table(const std::filesystem::path& dir);

} // namespace gipsp
