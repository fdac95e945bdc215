#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <span>

namespace hipv {

using Index = Eigen::Index;

struct CellIndex {
  Index i = 0;
  Index j = 0;
  Index k = 0;
  auto operator<=>(const CellIndex&) const = default;
};

/// Uniform node-centred grid. Node (i, j, k) sits at (x_min + i dx, y_min + j dy,
/// z_min + k dz); the endpoints are nodes. k = 0 is the ground plane.
class GridSpec {
 public:
  GridSpec() = default;

  /// Throws std::invalid_argument unless each extent is an integer multiple of
  /// its step and every axis has at least 3 nodes.
  static GridSpec from_extents(double x_min, double x_max, double y_min, double y_max, double z_min, double z_max,
                               double dx, double dy, double dz);

  /// 200 m x 200 m x 5 m field at 5 m x 5 m x 0.5 m spacing (41 x 41 x 11).
  static GridSpec paper_field();

  Index nx() const { return n_[0]; }
  Index ny() const { return n_[1]; }
  Index nz() const { return n_[2]; }
  Index cell_count() const { return n_[0] * n_[1] * n_[2]; }

  double dx() const { return step_[0]; }
  double dy() const { return step_[1]; }
  double dz() const { return step_[2]; }
  const Eigen::Vector3d& step() const { return step_; }
  const Eigen::Vector3d& origin() const { return origin_; }
  Eigen::Vector3d upper() const { return origin_ + step_.cwiseProduct((n_ - Eigen::Vector3<Index>::Ones()).cast<double>()); }
  const Eigen::Vector3<Index>& shape() const { return n_; }
  double cell_volume() const { return step_[0] * step_[1] * step_[2]; }

  double x(Index i) const { return origin_[0] + static_cast<double>(i) * step_[0]; }
  double y(Index j) const { return origin_[1] + static_cast<double>(j) * step_[1]; }
  double z(Index k) const { return origin_[2] + static_cast<double>(k) * step_[2]; }
  Eigen::Vector3d coordinates(const CellIndex& c) const { return {x(c.i), y(c.j), z(c.k)}; }

  /// z innermost: linear = (i * ny + j) * nz + k.
  Index linear(Index i, Index j, Index k) const { return (i * n_[1] + j) * n_[2] + k; }
  Index linear(const CellIndex& c) const { return linear(c.i, c.j, c.k); }
  Index stride_i() const { return n_[1] * n_[2]; }
  Index stride_j() const { return n_[2]; }

  bool contains(const CellIndex& c) const {
    return c.i >= 0 && c.j >= 0 && c.k >= 0 && c.i < n_[0] && c.j < n_[1] && c.k < n_[2];
  }
  bool is_interior(const CellIndex& c) const {
    return c.i > 0 && c.j > 0 && c.k > 0 && c.i < n_[0] - 1 && c.j < n_[1] - 1 && c.k < n_[2] - 1;
  }
  /// Inclusive bounds test with a relative slack of 1e-9 step.
  bool contains_point(const Eigen::Vector3d& p) const;

  bool operator==(const GridSpec&) const = default;

 private:
  Eigen::Vector3d origin_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d step_ = Eigen::Vector3d::Ones();
  Eigen::Vector3<Index> n_ = Eigen::Vector3<Index>::Constant(3);
};

/// Dense scalar field on a grid in GridSpec::linear order.
template <typename Scalar>
class BasicField {
 public:
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  BasicField() = default;
  explicit BasicField(const GridSpec& grid, Scalar fill = Scalar(0), double time = 0.0)
      : grid_(grid), values_(Storage::Constant(grid.cell_count(), fill)), time_(time) {}

  const GridSpec& grid() const { return grid_; }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  Scalar& operator()(Index i, Index j, Index k) { return values_[grid_.linear(i, j, k)]; }
  Scalar operator()(Index i, Index j, Index k) const { return values_[grid_.linear(i, j, k)]; }
  Scalar& operator()(const CellIndex& c) { return values_[grid_.linear(c)]; }
  Scalar operator()(const CellIndex& c) const { return values_[grid_.linear(c)]; }

  Storage& values() { return values_; }
  const Storage& values() const { return values_; }
  std::span<const Scalar> span() const { return {values_.data(), static_cast<std::size_t>(values_.size())}; }

 private:
  GridSpec grid_;
  Storage values_;
  double time_ = 0.0;
};

/// Concentration in molecules/m^3.
using ConcentrationField = BasicField<double>;

/// Per-axis nearest node; exact midpoints go to the lower index. Throws
/// std::out_of_range for points outside the domain.
CellIndex nearest_cell(const GridSpec& grid, const Eigen::Vector3d& point);

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values);

/// Total molecules: compensated sum of values times the cell volume.
double total_mass(const ConcentrationField& field);

/// Mean over every z-level with z in [z_center - half_width, z_center +
/// half_width], per (i, j) column; nx x ny. Throws std::invalid_argument when
/// no level falls in the slab.
Eigen::ArrayXXd slab_mean(const ConcentrationField& field, double z_center, double half_width);

}  // namespace hipv
