#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hipv/grid.hpp"

namespace hipv {

struct PointSource {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::int64_t sphere_count = 0;
};

struct Deployment {
  std::vector<PointSource> sources;
  std::int64_t total_spheres = 0;

  /// Counts sum to total_spheres, every position lies inside the grid with z > 0.
  void validate(const GridSpec& grid) const;
};

enum class Preset { central_patch, uniform_patch, four_corners, perimeter_stripe };

inline constexpr Preset kAllPresets[] = {Preset::central_patch, Preset::uniform_patch, Preset::four_corners,
                                         Preset::perimeter_stripe};

std::string_view to_string(Preset p);
std::optional<Preset> preset_from_string(std::string_view name);

/// Flower-stripe geometry shared by all presets. The stripe is centred on the
/// origin with its long side along x.
struct StripeLayout {
  double stripe_length = 80.0;  // m, along x
  double stripe_width = 4.0;    // m, along y
  double release_height = 0.5;  // m
  double lattice_pitch = 0.5;   // m
  double central_patch_size = 4.0;
  double corner_patch_size = 1.0;
  Eigen::Vector2d corner_offset{39.5, 1.5};
  double perimeter_band_width = 0.5;
};

/// Point sources for a preset. Each region is sampled on a square lattice of
/// the configured pitch (cell-centred within the region, at least one point
/// per axis) and the spheres are split equally over its points; the integer
/// remainder goes one sphere each to the first points in scan order. Scan
/// order is ascending x, then ascending y. For four_corners the N spheres are
/// first split over the patches in the order (-,-), (-,+), (+,-), (+,+).
/// perimeter_stripe puts its points on the centreline of a band of the
/// configured width running just inside the stripe boundary, equally spaced
/// by arc length starting half a spacing past the (-x, -y) corner and running
/// counter-clockwise.
///
/// Throws std::invalid_argument for N < 1 or a preset region that leaves the
/// flower stripe or the grid.
Deployment build_deployment(Preset preset, std::int64_t sphere_count, const GridSpec& grid,
                            const StripeLayout& layout = {});

/// CSV with header `x,y,z,sphere_count`.
void write_deployment_csv(std::ostream& out, const Deployment& deployment);
Deployment parse_deployment_csv(std::istream& in);
Deployment read_deployment_csv(const std::string& path);

/// Spheres gathered per grid node.
struct CellSource {
  CellIndex cell;
  double sphere_count = 0.0;
};

/// Snaps every source to its nearest node and merges sources sharing a node;
/// the result is sorted by linear index. Throws std::out_of_range if a source
/// is outside the grid or lands on a boundary node.
std::vector<CellSource> map_sources(const Deployment& deployment, const GridSpec& grid);

}  // namespace hipv
