#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hipv/config.hpp"
#include "hipv/metrics.hpp"
#include "hipv/solver.hpp"

namespace hipv {

struct RunRequest {
  /// Preset names; empty runs the config's deployment. "all" expands to
  /// every preset.
  std::vector<std::string> presets;
  /// Empty runs the config seed.
  std::vector<std::uint64_t> seeds;
  /// Overrides output.directory when set.
  std::optional<std::filesystem::path> out_dir;
};

struct RunSummary {
  std::filesystem::path directory;
  std::string deployment;
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  MassBudget budget;
  CeiResult cei;
};

/// Runs every (preset, seed) job of the request. A single job writes straight
/// into the output directory; a sweep writes `<out>/<preset>/seed_<n>/`.
///
/// Each run directory gets manifest.ini, deployment.csv, budget.csv
/// (`step,time_s,released,in_domain,absorbed_ground,boundary_outflow`),
/// cei_vs_threshold.csv (`threshold,cei`), cei_vs_time.csv (`time_s,cei` at
/// metrics.timeseries_threshold), cei_vs_time_all.csv (`time_s,threshold,cei`)
/// and per snapshot time `snapshot_<h>h.bin`,
/// `slab_<h>h.csv` and, with output.render on, `slab_<h>h.ppm`.
///
/// Throws SolverAbort or ConfigError; artifacts of finished jobs stay on disk.
std::vector<RunSummary> cmd_run(const SimulationConfig& config, const RunRequest& request, std::ostream& log);

/// Fits the release CSV, prints the report and writes it to `report_path`
/// when given.
KorsmeyerPeppasFit cmd_fit(const std::string& dataset_path, std::ostream& out,
                           const std::optional<std::filesystem::path>& report_path = std::nullopt);

/// Validates the config and prints the CFL report. Returns 0 when the config
/// is runnable.
int cmd_check(const std::string& config_path_or_name, std::ostream& out);

/// Wind at every node for one step as `i,j,k,x,y,z,vx,vy,vz`.
void cmd_wind_dump(const SimulationConfig& config, std::int64_t step, std::ostream& out);

struct AggregateRow {
  double threshold = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single run
  std::size_t runs = 0;
};

/// Mean and spread of CEI per threshold over several cei_vs_threshold.csv
/// files, which must share their thresholds.
std::vector<AggregateRow> aggregate_cei(const std::vector<std::filesystem::path>& files);

/// For each `<root>/<name>/seed_*/cei_vs_threshold.csv` group writes
/// `<root>/<name>/cei_mean.csv` (`threshold,mean,stddev,runs`) and one
/// `<root>/cei_summary.csv` (`deployment,threshold,mean,stddev,runs`).
/// Returns the number of groups.
std::size_t cmd_aggregate(const std::filesystem::path& root, std::ostream& log);

struct RenderOptions {
  /// Colour scale in log10(C); unset uses the data range.
  std::optional<double> log_min;
  std::optional<double> log_max;
  /// Height of the slab taken from a snapshot.
  double slab_z = 0.5;
  double slab_half_width = 0.0;
  /// Sources drawn over the map.
  std::optional<std::filesystem::path> deployment_csv;
  int scale = 1;
};

/// Binary PPM heatmap of a slab CSV or a snapshot (`.bin`), one pixel per node
/// times `scale`, x to the right and y up.
void cmd_render(const std::filesystem::path& input, const std::filesystem::path& output,
                const RenderOptions& options = {});

struct Image {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> rgb;  // row-major from the top row
};

/// Log-scaled colour map of a slab (rows are x, columns y). Nodes with
/// C <= 0 take the bottom colour.
Image render_slab(const Eigen::ArrayXXd& slab, const RenderOptions& options);
void write_ppm(const std::filesystem::path& path, const Image& image);

/// Parses `a..b` ranges and comma lists, e.g. `1..5` or `1,3,7`.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace hipv
