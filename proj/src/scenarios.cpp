#include "hipv/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "hipv/csv.hpp"

namespace hipv {

void Deployment::validate(const GridSpec& grid) const {
  std::int64_t sum = 0;
  for (const auto& s : sources) {
    if (s.sphere_count < 0) throw std::invalid_argument("deployment: negative sphere count");
    if (!grid.contains_point(s.position)) throw std::invalid_argument("deployment: source outside the domain");
    if (!(s.position.z() > grid.origin().z())) throw std::invalid_argument("deployment: sources must sit above the ground");
    sum += s.sphere_count;
  }
  if (sum != total_spheres) throw std::invalid_argument("deployment: sphere counts do not sum to the total");
}

std::string_view to_string(Preset p) {
  switch (p) {
    case Preset::central_patch: return "central_patch";
    case Preset::uniform_patch: return "uniform_patch";
    case Preset::four_corners: return "four_corners";
    case Preset::perimeter_stripe: return "perimeter_stripe";
  }
  return "unknown";
}

std::optional<Preset> preset_from_string(std::string_view name) {
  for (Preset p : kAllPresets) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

namespace {

constexpr double kFitSlack = 1e-9;

std::vector<Eigen::Vector2d> rectangle_lattice(const Eigen::Vector2d& centre, double size_x, double size_y,
                                               double pitch) {
  const auto mx = std::max<Index>(1, static_cast<Index>(std::floor(size_x / pitch + 1e-9)));
  const auto my = std::max<Index>(1, static_cast<Index>(std::floor(size_y / pitch + 1e-9)));
  const double x0 = centre.x() - 0.5 * static_cast<double>(mx - 1) * pitch;
  const double y0 = centre.y() - 0.5 * static_cast<double>(my - 1) * pitch;
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(static_cast<std::size_t>(mx * my));
  for (Index a = 0; a < mx; ++a) {
    for (Index b = 0; b < my; ++b) {
      pts.emplace_back(x0 + static_cast<double>(a) * pitch, y0 + static_cast<double>(b) * pitch);
    }
  }
  return pts;
}

std::vector<Eigen::Vector2d> rectangle_outline(double half_x, double half_y, double pitch) {
  const double perimeter = 4.0 * (half_x + half_y);
  auto m = std::max<Index>(4, static_cast<Index>(std::llround(perimeter / pitch)));
  if (m % 2) ++m;  // keeps the point set symmetric under (x, y) -> (-x, -y)
  const double spacing = perimeter / static_cast<double>(m);
  const double legs[4] = {2.0 * half_x, 2.0 * half_y, 2.0 * half_x, 2.0 * half_y};
  const Eigen::Vector2d starts[4] = {{-half_x, -half_y}, {half_x, -half_y}, {half_x, half_y}, {-half_x, half_y}};
  const Eigen::Vector2d dirs[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(static_cast<std::size_t>(m));
  for (Index a = 0; a < m; ++a) {
    double s = (static_cast<double>(a) + 0.5) * spacing;
    int leg = 0;
    while (leg < 3 && s > legs[leg]) {
      s -= legs[leg];
      ++leg;
    }
    pts.push_back(starts[leg] + s * dirs[leg]);
  }
  return pts;
}

void append_split(std::vector<PointSource>& out, const std::vector<Eigen::Vector2d>& pts, std::int64_t spheres,
                  double z) {
  std::vector<Eigen::Vector2d> ordered = pts;
  std::stable_sort(ordered.begin(), ordered.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  const auto count = static_cast<std::int64_t>(ordered.size());
  const std::int64_t base = spheres / count;
  const std::int64_t extra = spheres % count;
  for (std::int64_t p = 0; p < count; ++p) {
    const auto& xy = ordered[static_cast<std::size_t>(p)];
    out.push_back({Eigen::Vector3d(xy.x(), xy.y(), z), base + (p < extra ? 1 : 0)});
  }
}

void require_inside_stripe(const StripeLayout& s, double half_x, double half_y, const char* what) {
  if (half_x > 0.5 * s.stripe_length + kFitSlack || half_y > 0.5 * s.stripe_width + kFitSlack) {
    throw std::invalid_argument(std::string("deployment: ") + what + " does not fit inside the flower stripe");
  }
}

}  // namespace

Deployment build_deployment(Preset preset, std::int64_t sphere_count, const GridSpec& grid,
                            const StripeLayout& layout) {
  if (sphere_count < 1) throw std::invalid_argument("deployment: need at least one microsphere");
  if (!(layout.lattice_pitch > 0.0)) throw std::invalid_argument("deployment: lattice pitch must be > 0");
  if (!(layout.release_height > grid.origin().z())) throw std::invalid_argument("deployment: release height must be above ground");

  Deployment d;
  d.total_spheres = sphere_count;
  const double z = layout.release_height;
  const double half_len = 0.5 * layout.stripe_length;
  const double half_wid = 0.5 * layout.stripe_width;

  switch (preset) {
    case Preset::central_patch: {
      const double h = 0.5 * layout.central_patch_size;
      require_inside_stripe(layout, h, h, "central patch");
      append_split(d.sources, rectangle_lattice({0, 0}, layout.central_patch_size, layout.central_patch_size,
                                                layout.lattice_pitch),
                   sphere_count, z);
      break;
    }
    case Preset::uniform_patch: {
      append_split(d.sources, rectangle_lattice({0, 0}, layout.stripe_length, layout.stripe_width, layout.lattice_pitch),
                   sphere_count, z);
      break;
    }
    case Preset::four_corners: {
      const double h = 0.5 * layout.corner_patch_size;
      require_inside_stripe(layout, std::abs(layout.corner_offset.x()) + h, std::abs(layout.corner_offset.y()) + h,
                            "corner patch");
      const Eigen::Vector2d centres[4] = {{-layout.corner_offset.x(), -layout.corner_offset.y()},
                                          {-layout.corner_offset.x(), layout.corner_offset.y()},
                                          {layout.corner_offset.x(), -layout.corner_offset.y()},
                                          {layout.corner_offset.x(), layout.corner_offset.y()}};
      const std::int64_t base = sphere_count / 4;
      const std::int64_t extra = sphere_count % 4;
      for (int p = 0; p < 4; ++p) {
        append_split(d.sources,
                     rectangle_lattice(centres[p], layout.corner_patch_size, layout.corner_patch_size,
                                       layout.lattice_pitch),
                     base + (p < extra ? 1 : 0), z);
      }
      break;
    }
    case Preset::perimeter_stripe: {
      const double w = layout.perimeter_band_width;
      if (!(w > 0.0) || w > std::min(half_len, half_wid) + kFitSlack) {
        throw std::invalid_argument("deployment: perimeter band width does not fit inside the flower stripe");
      }
      append_split(d.sources, rectangle_outline(half_len - 0.5 * w, half_wid - 0.5 * w, layout.lattice_pitch),
                   sphere_count, z);
      break;
    }
  }

  for (const auto& s : d.sources) {
    if (!grid.contains_point(s.position)) {
      throw std::invalid_argument("deployment: preset region lies outside the domain");
    }
  }
  d.validate(grid);
  return d;
}

void write_deployment_csv(std::ostream& out, const Deployment& deployment) {
  out << "x,y,z,sphere_count\n";
  for (const auto& s : deployment.sources) {
    out << csv::format_double(s.position.x()) << ',' << csv::format_double(s.position.y()) << ','
        << csv::format_double(s.position.z()) << ',' << s.sphere_count << '\n';
  }
}

Deployment parse_deployment_csv(std::istream& in) {
  const auto table = csv::read_table(in);
  const auto xc = table.column("x"), yc = table.column("y"), zc = table.column("z"), nc = table.column("sphere_count");
  Deployment d;
  for (const auto& r : table.rows) {
    const double n = r[nc];
    if (!(n >= 0.0) || n != std::floor(n) || n > 9.0e18) {
      throw std::invalid_argument("deployment CSV: sphere_count must be a non-negative integer");
    }
    d.sources.push_back({Eigen::Vector3d(r[xc], r[yc], r[zc]), static_cast<std::int64_t>(n)});
    d.total_spheres += static_cast<std::int64_t>(n);
  }
  return d;
}

Deployment read_deployment_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open deployment CSV '" + path + "'");
  return parse_deployment_csv(in);
}

std::vector<CellSource> map_sources(const Deployment& deployment, const GridSpec& grid) {
  std::map<Index, CellSource> merged;
  for (const auto& s : deployment.sources) {
    const CellIndex c = nearest_cell(grid, s.position);
    if (!grid.is_interior(c)) throw std::out_of_range("source maps to a boundary node");
    auto& slot = merged[grid.linear(c)];
    slot.cell = c;
    slot.sphere_count += static_cast<double>(s.sphere_count);
  }
  std::vector<CellSource> out;
  out.reserve(merged.size());
  for (auto& [lin, cs] : merged) out.push_back(cs);
  return out;
}

}  // namespace hipv
