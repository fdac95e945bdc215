#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hipv/grid.hpp"
#include "hipv/kinetics.hpp"
#include "hipv/metrics.hpp"
#include "hipv/scenarios.hpp"
#include "hipv/solver.hpp"
#include "hipv/wind.hpp"

namespace hipv {

struct MetricsConfig {
  std::vector<double> thresholds = log_thresholds_default();
  /// Box in metres; unset means the whole grid.
  std::optional<Eigen::Vector3d> subvolume_min;
  std::optional<Eigen::Vector3d> subvolume_max;
  std::vector<double> snapshot_hours{1.0, 11.0, 22.0};
  double slab_z = 0.5;
  double slab_half_width = 0.0;
  /// CEI-vs-time rows every this many steps.
  std::int64_t history_stride = 1800;
  /// Threshold reported in cei_vs_time.csv; must be one of `thresholds`.
  double timeseries_threshold = 1e14;

  static std::vector<double> log_thresholds_default();
};

struct OutputConfig {
  std::string directory = "out";
  bool snapshots = true;
  bool slabs = true;
  bool render = false;
  /// budget.csv rows every this many steps.
  std::int64_t budget_stride = 1;
};

struct DeploymentConfig {
  std::string preset = "central_patch";
  /// When non-empty, sources come from this CSV instead of the preset.
  std::string csv_path;
  /// 0 derives the count from the microsphere inventory.
  std::int64_t sphere_count = 0;
  StripeLayout layout;
};

struct SimulationConfig {
  GridSpec grid = GridSpec::paper_field();
  SolverConfig solver;
  WindModelParams wind;
  ReleaseModel release;
  MicrosphereSpec microspheres;
  double microsphere_mass_kg = 2.0;
  double cargo_mass_kg = 0.2;
  DeploymentConfig deployment;
  MetricsConfig metrics;
  OutputConfig output;
  std::uint64_t seed = 1;

  /// molecules_per_sphere from the config, or from the inventory when the
  /// config leaves it at 0.
  ReleaseModel resolved_release() const;
  std::int64_t resolved_sphere_count() const;
  Deployment resolved_deployment() const;
  Subvolume resolved_subvolume() const;

  /// Whole-config validation: component invariants, CFL pre-check on the
  /// clamped wind bound, deployment inside the grid, increasing thresholds.
  /// Throws ConfigError.
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// INI text: `key = value` lines under `[section]` headers, `;` or `#`
/// comment lines, top-level `seed`. Unknown sections or keys are errors.
/// Missing keys keep their defaults, which reproduce the paper scenario.
SimulationConfig parse_config_text(const std::string& text, const std::string& source = "<config>");
SimulationConfig parse_config(const std::string& path);

/// A path to an INI file, or the name of a shipped config such as
/// `paper_baseline`.
SimulationConfig load_config(const std::string& path_or_name);

/// Every field as INI that parse_config_text reads back to the same config.
void write_config(std::ostream& out, const SimulationConfig& config);

/// Manifest: the config echo followed by comment lines with the version and
/// the CFL report.
void write_manifest(std::ostream& out, const SimulationConfig& config);

inline constexpr const char* kVersion = "1.0.0";

}  // namespace hipv
