#include "hipv/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hipv/csv.hpp"
#include "hipv/metrics.hpp"

#ifndef HIPV_CONFIG_DIR
#define HIPV_CONFIG_DIR "configs"
#endif

namespace hipv {

namespace pt = boost::property_tree;

std::vector<double> MetricsConfig::log_thresholds_default() { return log_spaced_thresholds(1e4, 1e14, 11); }

ReleaseModel SimulationConfig::resolved_release() const {
  ReleaseModel r = release;
  if (r.molecules_per_sphere == 0.0) {
    r.molecules_per_sphere = microsphere_inventory(microspheres, microsphere_mass_kg, cargo_mass_kg).molecules_per_sphere;
  }
  return r;
}

std::int64_t SimulationConfig::resolved_sphere_count() const {
  if (deployment.sphere_count > 0) return deployment.sphere_count;
  return std::llround(microsphere_inventory(microspheres, microsphere_mass_kg, cargo_mass_kg).sphere_count);
}

Deployment SimulationConfig::resolved_deployment() const {
  if (!deployment.csv_path.empty()) {
    Deployment d = read_deployment_csv(deployment.csv_path);
    d.validate(grid);
    return d;
  }
  const auto preset = preset_from_string(deployment.preset);
  if (!preset) throw ConfigError("deployment.preset: unknown preset '" + deployment.preset + "'");
  return build_deployment(*preset, resolved_sphere_count(), grid, deployment.layout);
}

Subvolume SimulationConfig::resolved_subvolume() const {
  if (!metrics.subvolume_min && !metrics.subvolume_max) return Subvolume::whole();
  const Eigen::Vector3d lo = metrics.subvolume_min.value_or(grid.origin());
  const Eigen::Vector3d hi = metrics.subvolume_max.value_or(grid.upper());
  return Subvolume::from_bounds(grid, lo, hi);
}

void SimulationConfig::validate() const {
  auto check = [](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string(section) + ": " + e.what());
    }
  };
  check("solver", [&] { solver.validate(); });
  check("wind", [&] { wind.validate(); });
  check("microspheres", [&] {
    microspheres.validate();
    if (!(microsphere_mass_kg > 0.0) || !(cargo_mass_kg > 0.0)) throw std::invalid_argument("masses must be > 0");
  });
  check("release", [&] {
    if (release.molecules_per_sphere < 0.0) throw std::invalid_argument("molecules_per_sphere must be >= 0");
    resolved_release().validate();
  });

  const CflReport cfl = check_cfl(grid, solver, wind_velocity_bound(wind, grid, solver.noise_clamp_sigmas));
  if (!cfl.passed()) throw ConfigError("solver: CFL pre-check failed: " + cfl.describe());

  check("deployment", [&] {
    const Deployment d = resolved_deployment();
    map_sources(d, grid);
  });

  check("metrics", [&] {
    const auto& th = metrics.thresholds;
    if (th.empty()) throw std::invalid_argument("need at least one threshold");
    for (std::size_t t = 0; t < th.size(); ++t) {
      if (!(th[t] > 0.0) || !std::isfinite(th[t])) throw std::invalid_argument("thresholds must be positive");
      if (t && !(th[t] > th[t - 1])) throw std::invalid_argument("thresholds must be strictly increasing");
    }
    for (double h : metrics.snapshot_hours) {
      if (!(h >= 0.0) || !std::isfinite(h)) throw std::invalid_argument("snapshot times must be >= 0");
    }
    if (std::none_of(th.begin(), th.end(), [&](double v) {
          return std::abs(v - metrics.timeseries_threshold) <= 1e-12 * std::abs(v);
        })) {
      throw std::invalid_argument("timeseries_threshold must be one of the thresholds");
    }
    if (metrics.history_stride < 1) throw std::invalid_argument("history_stride must be >= 1");
    if (!(metrics.slab_half_width >= 0.0)) throw std::invalid_argument("slab_half_width must be >= 0");
    resolved_subvolume();
  });
  if (output.budget_stride < 1) throw ConfigError("output: budget_stride must be >= 1");
  if (output.directory.empty()) throw ConfigError("output: directory must not be empty");
}

namespace {

/// Line of each `section.key`, for error messages.
std::map<std::string, int> key_lines(const std::string& text) {
  std::map<std::string, int> lines;
  std::istringstream in(text);
  std::string line, section;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == ';' || line[first] == '#') continue;
    if (line[first] == '[') {
      const auto close = line.find(']', first);
      section = line.substr(first + 1, close == std::string::npos ? std::string::npos : close - first - 1);
      lines.emplace(section, n);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(first, eq - first);
    key.erase(key.find_last_not_of(" \t") + 1);
    lines.emplace(section.empty() ? key : section + "." + key, n);
  }
  return lines;
}

const std::set<std::string> kSections{"grid", "solver", "wind", "release", "microspheres", "deployment", "metrics", "output"};

class Reader {
 public:
  Reader(const pt::ptree& tree, std::map<std::string, int> lines) : tree_(tree), lines_(std::move(lines)) {}

  const std::string* raw(const std::string& path) {
    const auto child = tree_.get_child_optional(pt::ptree::path_type(path, '.'));
    if (!child) return nullptr;
    used_.insert(path);
    return &child->data();
  }

  int line(const std::string& path) const {
    const auto it = lines_.find(path);
    return it == lines_.end() ? 0 : it->second;
  }

  void number(const std::string& path, double& out) {
    if (const auto* s = raw(path)) out = parse_number(path, *s);
  }

  void integer(const std::string& path, std::int64_t& out) {
    if (const auto* s = raw(path)) {
      const double v = parse_number(path, *s);
      if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ConfigError(path + ": expected an integer", line(path));
      out = static_cast<std::int64_t>(v);
    }
  }

  void unsigned_integer(const std::string& path, std::uint64_t& out) {
    if (const auto* s = raw(path)) {
      std::uint64_t v = 0;
      const auto* end = s->data() + s->size();
      const auto [ptr, ec] = std::from_chars(s->data(), end, v);
      if (ec != std::errc() || ptr != end) throw ConfigError(path + ": expected a non-negative integer", line(path));
      out = v;
    }
  }

  void boolean(const std::string& path, bool& out) {
    if (const auto* s = raw(path)) {
      if (*s == "true" || *s == "on" || *s == "yes" || *s == "1") {
        out = true;
      } else if (*s == "false" || *s == "off" || *s == "no" || *s == "0") {
        out = false;
      } else {
        throw ConfigError(path + ": expected true or false", line(path));
      }
    }
  }

  void text(const std::string& path, std::string& out) {
    if (const auto* s = raw(path)) out = *s;
  }

  void list(const std::string& path, std::vector<double>& out) {
    if (const auto* s = raw(path)) {
      out.clear();
      if (s->empty()) return;
      for (auto cell : csv::split(*s, ',')) out.push_back(parse_number(path, std::string(cell)));
    }
  }

  void vector3(const std::string& path, std::optional<Eigen::Vector3d>& out) {
    std::vector<double> v;
    if (!tree_.get_child_optional(pt::ptree::path_type(path, '.'))) return;
    list(path, v);
    if (v.size() != 3) throw ConfigError(path + ": expected three comma-separated numbers", line(path));
    out = Eigen::Vector3d(v[0], v[1], v[2]);
  }

  /// Rejects sections and keys that nothing read.
  void reject_unused() const {
    for (const auto& [name, child] : tree_) {
      if (child.empty()) {
        if (!used_.count(name) && !kSections.count(name)) throw ConfigError("unknown key '" + name + "'", line(name));
        continue;
      }
      for (const auto& [key, value] : child) {
        const std::string path = name + "." + key;
        if (!used_.count(path)) throw ConfigError("unknown key '" + path + "'", line(path));
      }
    }
  }

 private:
  double parse_number(const std::string& path, const std::string& s) const {
    try {
      std::string trimmed = s;
      trimmed.erase(0, trimmed.find_first_not_of(" \t"));
      trimmed.erase(trimmed.find_last_not_of(" \t") + 1);
      return csv::parse_double(trimmed, static_cast<std::size_t>(line(path)));
    } catch (const std::exception&) {
      throw ConfigError(path + ": expected a number, got '" + s + "'", line(path));
    }
  }

  const pt::ptree& tree_;
  std::map<std::string, int> lines_;
  std::set<std::string> used_;
};

}  // namespace

SimulationConfig parse_config_text(const std::string& text, const std::string& source) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ConfigError(source + ": empty configuration", 1);
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ": " + e.message(), static_cast<int>(e.line()));
  }

  const auto lines = key_lines(text);
  for (const auto& [name, child] : tree) {
    if (!child.empty() && !kSections.count(name)) {
      const auto it = lines.find(name);
      throw ConfigError("unknown section [" + name + "]", it == lines.end() ? 0 : it->second);
    }
  }

  Reader r(tree, lines);
  SimulationConfig c;

  {
    const GridSpec g = c.grid;
    double x0 = g.origin().x(), x1 = g.upper().x(), y0 = g.origin().y(), y1 = g.upper().y();
    double z0 = g.origin().z(), z1 = g.upper().z(), dx = g.dx(), dy = g.dy(), dz = g.dz();
    r.number("grid.x_min", x0);
    r.number("grid.x_max", x1);
    r.number("grid.y_min", y0);
    r.number("grid.y_max", y1);
    r.number("grid.z_min", z0);
    r.number("grid.z_max", z1);
    r.number("grid.dx", dx);
    r.number("grid.dy", dy);
    r.number("grid.dz", dz);
    try {
      c.grid = GridSpec::from_extents(x0, x1, y0, y1, z0, z1, dx, dy, dz);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("grid: ") + e.what(), r.line("grid"));
    }
  }

  r.number("solver.diffusion_coefficient", c.solver.diffusion_coefficient);
  r.number("solver.dt", c.solver.dt);
  r.integer("solver.total_steps", c.solver.total_steps);
  r.boolean("solver.cfl_runtime_check", c.solver.cfl_runtime_check);
  r.number("solver.noise_clamp_sigmas", c.solver.noise_clamp_sigmas);
  r.integer("solver.nan_check_interval", c.solver.nan_check_interval);
  {
    std::int64_t w = c.solver.workers;
    r.integer("solver.workers", w);
    if (w < 1 || w > 1024) throw ConfigError("solver.workers: must be in [1, 1024]", r.line("solver.workers"));
    c.solver.workers = static_cast<unsigned>(w);
  }

  r.number("wind.mean_speed", c.wind.mean_speed);
  r.number("wind.diurnal_amplitude", c.wind.diurnal_amplitude);
  r.number("wind.diurnal_period", c.wind.diurnal_period);
  r.number("wind.speed_noise_variance", c.wind.speed_noise_variance);
  r.number("wind.direction_noise_variance", c.wind.direction_noise_variance);
  r.number("wind.vertical_scale", c.wind.vertical_scale);
  r.number("wind.reference_height", c.wind.reference_height);

  r.number("release.k", c.release.k);
  r.number("release.n", c.release.n);
  r.number("release.molecules_per_sphere", c.release.molecules_per_sphere);

  r.number("microspheres.diameter", c.microspheres.diameter);
  r.number("microspheres.matrix_density", c.microspheres.matrix_density);
  r.number("microspheres.cargo_density", c.microspheres.cargo_density);
  r.number("microspheres.cargo_mass_fraction", c.microspheres.cargo_mass_fraction);
  r.number("microspheres.cargo_molar_mass", c.microspheres.cargo_molar_mass);
  r.number("microspheres.microsphere_mass_kg", c.microsphere_mass_kg);
  r.number("microspheres.cargo_mass_kg", c.cargo_mass_kg);

  r.text("deployment.preset", c.deployment.preset);
  r.text("deployment.csv", c.deployment.csv_path);
  r.integer("deployment.sphere_count", c.deployment.sphere_count);
  {
    auto& l = c.deployment.layout;
    r.number("deployment.stripe_length", l.stripe_length);
    r.number("deployment.stripe_width", l.stripe_width);
    r.number("deployment.release_height", l.release_height);
    r.number("deployment.lattice_pitch", l.lattice_pitch);
    r.number("deployment.central_patch_size", l.central_patch_size);
    r.number("deployment.corner_patch_size", l.corner_patch_size);
    r.number("deployment.corner_offset_x", l.corner_offset.x());
    r.number("deployment.corner_offset_y", l.corner_offset.y());
    r.number("deployment.perimeter_band_width", l.perimeter_band_width);
  }

  r.list("metrics.thresholds", c.metrics.thresholds);
  r.vector3("metrics.subvolume_min", c.metrics.subvolume_min);
  r.vector3("metrics.subvolume_max", c.metrics.subvolume_max);
  r.list("metrics.snapshot_hours", c.metrics.snapshot_hours);
  r.number("metrics.slab_z", c.metrics.slab_z);
  r.number("metrics.slab_half_width", c.metrics.slab_half_width);
  r.integer("metrics.history_stride", c.metrics.history_stride);
  r.number("metrics.timeseries_threshold", c.metrics.timeseries_threshold);

  r.text("output.directory", c.output.directory);
  r.boolean("output.snapshots", c.output.snapshots);
  r.boolean("output.slabs", c.output.slabs);
  r.boolean("output.render", c.output.render);
  r.integer("output.budget_stride", c.output.budget_stride);

  r.unsigned_integer("seed", c.seed);
  c.wind.seed = c.seed;

  r.reject_unused();
  c.validate();
  return c;
}

SimulationConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

SimulationConfig load_config(const std::string& path_or_name) {
  namespace fs = std::filesystem;
  if (fs::exists(path_or_name)) return parse_config(path_or_name);
  const fs::path shipped = fs::path(HIPV_CONFIG_DIR) / (path_or_name + ".ini");
  if (path_or_name.find('/') == std::string::npos && fs::exists(shipped)) return parse_config(shipped.string());
  if (path_or_name == "paper_baseline") {
    SimulationConfig c;
    c.validate();
    return c;
  }
  throw ConfigError("no config file or shipped config named '" + path_or_name + "'");
}

namespace {

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t a = 0; a < v.size(); ++a) {
    if (a) s += ',';
    s += csv::format_double(v[a]);
  }
  return s;
}

std::string join(const Eigen::Vector3d& v) { return join(std::vector<double>{v.x(), v.y(), v.z()}); }

}  // namespace

void write_config(std::ostream& out, const SimulationConfig& c) {
  auto num = [](double v) { return csv::format_double(v); };
  auto flag = [](bool b) { return b ? "true" : "false"; };
  const auto& g = c.grid;
  out << "seed = " << c.seed << "\n\n";
  out << "[grid]\n"
      << "x_min = " << num(g.origin().x()) << "\nx_max = " << num(g.upper().x()) << '\n'
      << "y_min = " << num(g.origin().y()) << "\ny_max = " << num(g.upper().y()) << '\n'
      << "z_min = " << num(g.origin().z()) << "\nz_max = " << num(g.upper().z()) << '\n'
      << "dx = " << num(g.dx()) << "\ndy = " << num(g.dy()) << "\ndz = " << num(g.dz()) << "\n\n";
  out << "[solver]\n"
      << "diffusion_coefficient = " << num(c.solver.diffusion_coefficient) << '\n'
      << "dt = " << num(c.solver.dt) << '\n'
      << "total_steps = " << c.solver.total_steps << '\n'
      << "cfl_runtime_check = " << flag(c.solver.cfl_runtime_check) << '\n'
      << "noise_clamp_sigmas = " << num(c.solver.noise_clamp_sigmas) << '\n'
      << "nan_check_interval = " << c.solver.nan_check_interval << '\n'
      << "workers = " << c.solver.workers << "\n\n";
  out << "[wind]\n"
      << "mean_speed = " << num(c.wind.mean_speed) << '\n'
      << "diurnal_amplitude = " << num(c.wind.diurnal_amplitude) << '\n'
      << "diurnal_period = " << num(c.wind.diurnal_period) << '\n'
      << "speed_noise_variance = " << num(c.wind.speed_noise_variance) << '\n'
      << "direction_noise_variance = " << num(c.wind.direction_noise_variance) << '\n'
      << "vertical_scale = " << num(c.wind.vertical_scale) << '\n'
      << "reference_height = " << num(c.wind.reference_height) << "\n\n";
  out << "[release]\n"
      << "k = " << num(c.release.k) << '\n'
      << "n = " << num(c.release.n) << '\n'
      << "molecules_per_sphere = " << num(c.release.molecules_per_sphere) << "\n\n";
  out << "[microspheres]\n"
      << "diameter = " << num(c.microspheres.diameter) << '\n'
      << "matrix_density = " << num(c.microspheres.matrix_density) << '\n'
      << "cargo_density = " << num(c.microspheres.cargo_density) << '\n'
      << "cargo_mass_fraction = " << num(c.microspheres.cargo_mass_fraction) << '\n'
      << "cargo_molar_mass = " << num(c.microspheres.cargo_molar_mass) << '\n'
      << "microsphere_mass_kg = " << num(c.microsphere_mass_kg) << '\n'
      << "cargo_mass_kg = " << num(c.cargo_mass_kg) << "\n\n";
  const auto& l = c.deployment.layout;
  out << "[deployment]\n"
      << "preset = " << c.deployment.preset << '\n'
      << "csv = " << c.deployment.csv_path << '\n'
      << "sphere_count = " << c.deployment.sphere_count << '\n'
      << "stripe_length = " << num(l.stripe_length) << '\n'
      << "stripe_width = " << num(l.stripe_width) << '\n'
      << "release_height = " << num(l.release_height) << '\n'
      << "lattice_pitch = " << num(l.lattice_pitch) << '\n'
      << "central_patch_size = " << num(l.central_patch_size) << '\n'
      << "corner_patch_size = " << num(l.corner_patch_size) << '\n'
      << "corner_offset_x = " << num(l.corner_offset.x()) << '\n'
      << "corner_offset_y = " << num(l.corner_offset.y()) << '\n'
      << "perimeter_band_width = " << num(l.perimeter_band_width) << "\n\n";
  out << "[metrics]\n"
      << "thresholds = " << join(c.metrics.thresholds) << '\n';
  if (c.metrics.subvolume_min) out << "subvolume_min = " << join(*c.metrics.subvolume_min) << '\n';
  if (c.metrics.subvolume_max) out << "subvolume_max = " << join(*c.metrics.subvolume_max) << '\n';
  out << "snapshot_hours = " << join(c.metrics.snapshot_hours) << '\n'
      << "slab_z = " << num(c.metrics.slab_z) << '\n'
      << "slab_half_width = " << num(c.metrics.slab_half_width) << '\n'
      << "history_stride = " << c.metrics.history_stride << '\n'
      << "timeseries_threshold = " << num(c.metrics.timeseries_threshold) << "\n\n";
  out << "[output]\n"
      << "directory = " << c.output.directory << '\n'
      << "snapshots = " << flag(c.output.snapshots) << '\n'
      << "slabs = " << flag(c.output.slabs) << '\n'
      << "render = " << flag(c.output.render) << '\n'
      << "budget_stride = " << c.output.budget_stride << '\n';
}

void write_manifest(std::ostream& out, const SimulationConfig& c) {
  out << "# hipvsim " << kVersion << " run manifest\n";
  const ReleaseModel rel = c.resolved_release();
  out << "# resolved molecules_per_sphere = " << csv::format_double(rel.molecules_per_sphere) << '\n'
      << "# resolved sphere_count = " << c.resolved_sphere_count() << '\n';
  const CflReport cfl = check_cfl(c.grid, c.solver, wind_velocity_bound(c.wind, c.grid, c.solver.noise_clamp_sigmas));
  out << "# cfl " << (cfl.passed() ? "passed" : "FAILED") << ": " << cfl.describe() << "\n\n";
  write_config(out, c);
}

}  // namespace hipv
