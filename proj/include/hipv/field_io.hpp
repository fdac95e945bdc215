#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <string>

#include "hipv/grid.hpp"

namespace hipv {

/// Binary snapshot layout, little-endian:
///
///   offset  size  field
///        0     8  magic "HIPVSNAP"
///        8     4  uint32 version (1)
///       12     4  uint32 nx
///       16     4  uint32 ny
///       20     4  uint32 nz
///       24    24  float64 dx, dy, dz
///       48    24  float64 x_min, y_min, z_min
///       72     8  float64 time (s)
///       80  8*N   float64 values, linear = (i * ny + j) * nz + k
inline constexpr char kSnapshotMagic[8] = {'H', 'I', 'P', 'V', 'S', 'N', 'A', 'P'};
inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 80;

void write_snapshot(std::ostream& out, const ConcentrationField& field);
void write_snapshot(const std::string& path, const ConcentrationField& field);
ConcentrationField read_snapshot(std::istream& in);
ConcentrationField read_snapshot(const std::string& path);

/// Slab CSV: header `x,y,concentration`, one row per (i, j), i outer.
void write_slab_csv(std::ostream& out, const GridSpec& grid, const Eigen::ArrayXXd& slab);
void write_slab_csv(const std::string& path, const GridSpec& grid, const Eigen::ArrayXXd& slab);

struct SlabTable {
  Eigen::ArrayXd x;  // distinct x, ascending
  Eigen::ArrayXd y;  // distinct y, ascending
  Eigen::ArrayXXd values;  // x.size() rows by y.size() columns
};

SlabTable read_slab_csv(std::istream& in);
SlabTable read_slab_csv(const std::string& path);

}  // namespace hipv
