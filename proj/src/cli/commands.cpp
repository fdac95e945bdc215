#include "hipv/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "hipv/csv.hpp"
#include "hipv/field_io.hpp"

namespace hipv {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::string hours_label(double hours) { return csv::format_double(hours) + "h"; }

struct Job {
  SimulationConfig config;
  std::string name;
  fs::path dir;
};

RunSummary run_job(const Job& job, std::ostream& log) {
  const SimulationConfig& c = job.config;
  fs::create_directories(job.dir);

  {
    auto out = open_out(job.dir / "manifest.ini");
    write_manifest(out, c);
  }
  const Deployment deployment = c.resolved_deployment();
  {
    auto out = open_out(job.dir / "deployment.csv");
    write_deployment_csv(out, deployment);
  }

  Simulation sim(c.grid, c.solver, c.wind, c.resolved_release(), map_sources(deployment, c.grid));
  CeiAccumulator cei(c.grid, c.metrics.thresholds, c.resolved_subvolume(), c.solver.dt, c.metrics.history_stride);

  std::map<std::int64_t, double> snapshot_hours;
  for (double h : c.metrics.snapshot_hours) {
    const auto s = static_cast<std::int64_t>(std::llround(h * kSecondsPerHour / c.solver.dt));
    if (s <= c.solver.total_steps) snapshot_hours.emplace(s, h);
  }
  auto emit_snapshot = [&](const ConcentrationField& field, double hours) {
    const std::string label = hours_label(hours);
    if (c.output.snapshots) write_snapshot((job.dir / ("snapshot_" + label + ".bin")).string(), field);
    if (c.output.slabs || c.output.render) {
      const Eigen::ArrayXXd slab = slab_mean(field, c.metrics.slab_z, c.metrics.slab_half_width);
      if (c.output.slabs) write_slab_csv((job.dir / ("slab_" + label + ".csv")).string(), c.grid, slab);
      if (c.output.render) write_ppm(job.dir / ("slab_" + label + ".ppm"), render_slab(slab, {}));
    }
  };
  if (const auto it = snapshot_hours.find(0); it != snapshot_hours.end()) emit_snapshot(sim.field(), it->second);

  auto budget_out = open_out(job.dir / "budget.csv");
  budget_out << "step,time_s,released,in_domain,absorbed_ground,boundary_outflow\n";
  auto budget_row = [&](const Simulation& s) {
    const MassBudget& b = s.budget();
    csv::write_row(budget_out, {static_cast<double>(s.step_index()), s.time(), b.released, b.in_domain,
                                b.absorbed_ground, b.boundary_outflow});
  };
  if (c.solver.total_steps > 0) budget_row(sim);

  RunPlan plan;
  plan.budget_stride = 0;
  const std::int64_t stride = c.output.budget_stride;
  const std::int64_t total = c.solver.total_steps;
  run(sim, plan, &cei, [&](const Simulation& s) {
    const std::int64_t done = s.step_index();
    if (done % stride == 0 || done == total) budget_row(s);
    if (const auto it = snapshot_hours.find(done); it != snapshot_hours.end()) emit_snapshot(s.field(), it->second);
  });
  budget_out.close();

  RunSummary summary;
  summary.directory = job.dir;
  summary.deployment = job.name;
  summary.seed = c.seed;
  summary.steps = sim.step_index();
  summary.budget = sim.budget();
  summary.cei = finalize(cei);

  {
    auto out = open_out(job.dir / "cei_vs_threshold.csv");
    out << "threshold,cei\n";
    for (std::size_t t = 0; t < summary.cei.cei.size(); ++t) {
      csv::write_row(out, {summary.cei.thresholds[t], summary.cei.cei[t]});
    }
  }
  {
    auto out = open_out(job.dir / "cei_vs_time.csv");
    out << "time_s,cei\n";
    for (const auto& p : cei_timeseries(cei, c.metrics.timeseries_threshold)) csv::write_row(out, {p.time, p.cei});
  }
  {
    auto out = open_out(job.dir / "cei_vs_time_all.csv");
    out << "time_s,threshold,cei\n";
    for (double th : c.metrics.thresholds) {
      for (const auto& p : cei_timeseries(cei, th)) csv::write_row(out, {p.time, th, p.cei});
    }
  }

  log << job.name << " seed " << c.seed << ": " << summary.steps << " steps, released "
      << csv::format_double(summary.budget.released) << " molecules, CEI(" << csv::format_double(summary.cei.thresholds.back())
      << ") = " << csv::format_double(summary.cei.cei.back()) << " -> " << job.dir.string() << '\n';
  return summary;
}

}  // namespace

std::vector<RunSummary> cmd_run(const SimulationConfig& config, const RunRequest& request, std::ostream& log) {
  std::vector<std::string> presets;
  for (const auto& p : request.presets) {
    if (p == "all") {
      for (Preset q : kAllPresets) presets.emplace_back(to_string(q));
    } else if (!preset_from_string(p)) {
      throw ConfigError("unknown preset '" + p + "'");
    } else {
      presets.push_back(p);
    }
  }
  const std::vector<std::uint64_t> seeds = request.seeds.empty() ? std::vector<std::uint64_t>{config.seed} : request.seeds;
  const fs::path root = request.out_dir.value_or(fs::path(config.output.directory));

  std::vector<Job> jobs;
  const bool sweep = presets.size() > 1 || seeds.size() > 1;
  const std::vector<std::string> names =
      presets.empty() ? std::vector<std::string>{config.deployment.csv_path.empty() ? config.deployment.preset : "custom"}
                      : presets;
  for (const auto& name : names) {
    for (std::uint64_t seed : seeds) {
      Job job{config, name, root};
      if (!presets.empty()) {
        job.config.deployment.preset = name;
        job.config.deployment.csv_path.clear();
      }
      job.config.seed = seed;
      job.config.wind.seed = seed;
      job.config.output.directory = root.string();
      if (sweep) job.dir = root / name / ("seed_" + std::to_string(seed));
      job.config.validate();
      jobs.push_back(std::move(job));
    }
  }

  std::vector<RunSummary> out;
  out.reserve(jobs.size());
  for (const auto& job : jobs) out.push_back(run_job(job, log));
  return out;
}

KorsmeyerPeppasFit cmd_fit(const std::string& dataset_path, std::ostream& out,
                           const std::optional<fs::path>& report_path) {
  const ReleaseDataset data = read_release_csv(dataset_path);
  const KorsmeyerPeppasFit fit = fit_korsmeyer_peppas(data);
  write_fit_report(out, fit);
  if (report_path) {
    auto f = open_out(*report_path);
    write_fit_report(f, fit);
  }
  return fit;
}

int cmd_check(const std::string& config_path_or_name, std::ostream& out) {
  SimulationConfig c;
  try {
    c = load_config(config_path_or_name);
  } catch (const std::exception& e) {
    out << "invalid: " << e.what() << '\n';
    return 1;
  }
  const CflReport cfl = check_cfl(c.grid, c.solver, wind_velocity_bound(c.wind, c.grid, c.solver.noise_clamp_sigmas));
  out << "valid\n" << cfl.describe() << '\n';
  const Deployment d = c.resolved_deployment();
  out << "deployment " << (c.deployment.csv_path.empty() ? c.deployment.preset : c.deployment.csv_path) << ": "
      << d.sources.size() << " points, " << map_sources(d, c.grid).size() << " source nodes, " << d.total_spheres
      << " microspheres\n";
  return 0;
}

void cmd_wind_dump(const SimulationConfig& config, std::int64_t step, std::ostream& out) {
  if (step < 0) throw std::invalid_argument("wind-dump: step must be >= 0");
  const GridSpec& g = config.grid;
  WindBuffer buffer(g);
  sample_wind(config.wind, g, static_cast<double>(step) * config.solver.dt, step, buffer);
  out << "i,j,k,x,y,z,vx,vy,vz\n";
  for (Index i = 0; i < g.nx(); ++i) {
    for (Index j = 0; j < g.ny(); ++j) {
      for (Index k = 0; k < g.nz(); ++k) {
        const auto v = buffer.at(g.linear(i, j, k));
        out << i << ',' << j << ',' << k << ',';
        csv::write_row(out, {g.x(i), g.y(j), g.z(k), v.x(), v.y(), v.z()});
      }
    }
  }
}

std::vector<AggregateRow> aggregate_cei(const std::vector<fs::path>& files) {
  if (files.empty()) throw std::invalid_argument("aggregate: no input files");
  std::vector<double> thresholds;
  std::vector<std::vector<double>> values;
  for (const auto& f : files) {
    const auto table = csv::read_table_file(f.string());
    const auto tc = table.column("threshold"), cc = table.column("cei");
    std::vector<double> th, v;
    for (const auto& r : table.rows) {
      th.push_back(r[tc]);
      v.push_back(r[cc]);
    }
    if (thresholds.empty()) {
      thresholds = th;
    } else if (th != thresholds) {
      throw std::invalid_argument("aggregate: '" + f.string() + "' uses different thresholds");
    }
    values.push_back(std::move(v));
  }
  std::vector<AggregateRow> rows(thresholds.size());
  const double n = static_cast<double>(values.size());
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    double sum = 0.0;
    for (const auto& v : values) sum += v[t];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& v : values) ss += (v[t] - mean) * (v[t] - mean);
    rows[t] = {thresholds[t], mean, values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0, values.size()};
  }
  return rows;
}

std::size_t cmd_aggregate(const fs::path& root, std::ostream& log) {
  if (!fs::is_directory(root)) throw std::runtime_error("aggregate: '" + root.string() + "' is not a directory");
  std::map<std::string, std::vector<fs::path>> groups;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    std::vector<fs::path> files;
    for (const auto& sub : fs::directory_iterator(entry.path())) {
      const auto file = sub.path() / "cei_vs_threshold.csv";
      if (sub.is_directory() && sub.path().filename().string().starts_with("seed_") && fs::exists(file)) {
        files.push_back(file);
      }
    }
    std::sort(files.begin(), files.end());
    if (!files.empty()) groups[entry.path().filename().string()] = std::move(files);
  }
  if (groups.empty()) throw std::runtime_error("aggregate: no <name>/seed_*/cei_vs_threshold.csv under '" + root.string() + "'");

  auto summary = open_out(root / "cei_summary.csv");
  summary << "deployment,threshold,mean,stddev,runs\n";
  for (const auto& [name, files] : groups) {
    const auto rows = aggregate_cei(files);
    auto out = open_out(root / name / "cei_mean.csv");
    out << "threshold,mean,stddev,runs\n";
    for (const auto& r : rows) {
      csv::write_row(out, {r.threshold, r.mean, r.stddev, static_cast<double>(r.runs)});
      summary << name << ',';
      csv::write_row(summary, {r.threshold, r.mean, r.stddev, static_cast<double>(r.runs)});
    }
    log << name << ": " << files.size() << " runs\n";
  }
  return groups.size();
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw std::invalid_argument("bad seed list '" + text + "'");
    }
    return v;
  };
  std::vector<std::uint64_t> out;
  for (auto part : csv::split(text, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(number(part));
      continue;
    }
    const auto a = number(part.substr(0, dots)), b = number(part.substr(dots + 2));
    if (b < a || b - a > 100000) throw std::invalid_argument("bad seed range '" + std::string(part) + "'");
    for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
  }
  return out;
}

}  // namespace hipv
