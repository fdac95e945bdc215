#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hipv/commands.hpp"
#include "hipv/csv.hpp"

namespace {

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  for (auto cell : hipv::csv::split(text, ',')) out.push_back(hipv::csv::parse_double(cell, 0));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiochemical dispersion simulator"};
  app.require_subcommand(1);

  std::string config_name = "paper_baseline";
  std::string preset, seeds, out_dir, snapshot_times, thresholds;
  unsigned workers = 0;
  std::int64_t steps = 0;

  auto* run = app.add_subcommand("run", "Run one scenario or a preset x seed sweep");
  run->add_option("config,--config", config_name, "Config file or shipped config name")->capture_default_str();
  run->add_option("--preset", preset, "Preset name or 'all'");
  run->add_option("--seed,--seeds", seeds, "Seed, list (1,3) or range (1..5)");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--snapshot-times", snapshot_times, "Snapshot times in hours, comma separated");
  run->add_option("--thresholds", thresholds, "CEI thresholds in molecules/m^3, comma separated");
  run->add_option("--workers", workers, "Worker threads for the stencil")->check(CLI::Range(1u, 1024u));
  run->add_option("--steps", steps, "Override solver.total_steps")->check(CLI::PositiveNumber);

  std::string dataset, report;
  auto* fit = app.add_subcommand("fit", "Fit Korsmeyer-Peppas parameters to a release CSV");
  fit->add_option("dataset", dataset, "CSV with columns time_hours,fraction")->required();
  fit->add_option("--out", report, "Also write the report here");

  std::string render_in, render_out, render_deployment;
  double slab_z = 0.5;
  int scale = 1;
  std::optional<double> log_min, log_max;
  auto* render = app.add_subcommand("render", "Heatmap of a slab CSV or snapshot");
  render->add_option("input", render_in, "slab_*.csv or snapshot_*.bin")->required();
  render->add_option("--out", render_out, "Output PPM")->required();
  render->add_option("--deployment", render_deployment, "deployment.csv to overlay");
  render->add_option("--z", slab_z, "Slab height for snapshots (m)");
  render->add_option("--scale", scale, "Pixels per node")->check(CLI::Range(1, 64));
  render->add_option("--log-min", log_min, "Bottom of the colour scale, log10(C)");
  render->add_option("--log-max", log_max, "Top of the colour scale, log10(C)");

  std::string aggregate_root;
  auto* aggregate = app.add_subcommand("aggregate", "Mean and stddev of CEI across seeds of a sweep");
  aggregate->add_option("root", aggregate_root, "Sweep output directory")->required();

  auto* check = app.add_subcommand("check", "Validate a config and print the CFL report");
  check->add_option("config,--config", config_name, "Config file or shipped config name")->capture_default_str();

  std::int64_t dump_step = 0;
  std::string dump_out;
  auto* wind_dump = app.add_subcommand("wind-dump", "Write the wind field of one step as CSV");
  wind_dump->add_option("config,--config", config_name, "Config file or shipped config name")->capture_default_str();
  wind_dump->add_option("--step", dump_step, "Step index")->check(CLI::NonNegativeNumber);
  wind_dump->add_option("--seed", seeds, "Wind seed");
  wind_dump->add_option("--out", dump_out, "Output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      hipv::SimulationConfig config = hipv::load_config(config_name);
      if (!snapshot_times.empty()) config.metrics.snapshot_hours = parse_numbers(snapshot_times);
      if (!thresholds.empty()) config.metrics.thresholds = parse_numbers(thresholds);
      if (workers > 0) config.solver.workers = workers;
      if (steps > 0) config.solver.total_steps = steps;
      config.validate();
      hipv::RunRequest request;
      if (!preset.empty()) request.presets.push_back(preset);
      if (!seeds.empty()) request.seeds = hipv::parse_seed_list(seeds);
      if (!out_dir.empty()) request.out_dir = out_dir;
      hipv::cmd_run(config, request, std::cout);
    } else if (*fit) {
      std::optional<std::filesystem::path> path;
      if (!report.empty()) path = report;
      hipv::cmd_fit(dataset, std::cout, path);
    } else if (*render) {
      hipv::RenderOptions options;
      options.slab_z = slab_z;
      options.scale = scale;
      options.log_min = log_min;
      options.log_max = log_max;
      if (!render_deployment.empty()) options.deployment_csv = render_deployment;
      hipv::cmd_render(render_in, render_out, options);
    } else if (*aggregate) {
      hipv::cmd_aggregate(aggregate_root, std::cout);
    } else if (*check) {
      return hipv::cmd_check(config_name, std::cout);
    } else if (*wind_dump) {
      hipv::SimulationConfig config = hipv::load_config(config_name);
      if (!seeds.empty()) {
        const auto list = hipv::parse_seed_list(seeds);
        if (list.size() != 1) throw std::invalid_argument("wind-dump takes a single seed");
        config.seed = config.wind.seed = list.front();
      }
      if (dump_out.empty()) {
        hipv::cmd_wind_dump(config, dump_step, std::cout);
      } else {
        std::ofstream out(dump_out);
        if (!out) throw std::runtime_error("cannot write '" + dump_out + "'");
        hipv::cmd_wind_dump(config, dump_step, out);
      }
    }
  } catch (const hipv::SolverAbort& e) {
    std::cerr << "error: solver aborted at step " << e.step() << ": " << e.what() << '\n';
    return 3;
  } catch (const hipv::ConfigError& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
