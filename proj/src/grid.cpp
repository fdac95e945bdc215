#include "hipv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <vector>
#include <stdexcept>
#include <string>

namespace hipv {

GridSpec GridSpec::from_extents(double x_min, double x_max, double y_min, double y_max, double z_min, double z_max,
                                double dx, double dy, double dz) {
  GridSpec g;
  const double lo[3] = {x_min, y_min, z_min};
  const double hi[3] = {x_max, y_max, z_max};
  const double d[3] = {dx, dy, dz};
  const char* names[3] = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    if (!(d[a] > 0.0) || !std::isfinite(d[a])) {
      throw std::invalid_argument(std::string("grid: d") + names[a] + " must be > 0");
    }
    if (!(hi[a] > lo[a])) throw std::invalid_argument(std::string("grid: ") + names[a] + "_max must exceed " + names[a] + "_min");
    const double cells = (hi[a] - lo[a]) / d[a];
    const double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, rounded)) {
      throw std::invalid_argument(std::string("grid: ") + names[a] + " extent is not a multiple of d" + names[a]);
    }
    const auto n = static_cast<Index>(rounded) + 1;
    if (n < 3) throw std::invalid_argument(std::string("grid: need at least 3 nodes along ") + names[a]);
    g.n_[a] = n;
    g.origin_[a] = lo[a];
    g.step_[a] = d[a];
  }
  return g;
}

GridSpec GridSpec::paper_field() { return from_extents(-100, 100, -100, 100, 0, 5, 5, 5, 0.5); }

bool GridSpec::contains_point(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d hi = upper();
  for (int a = 0; a < 3; ++a) {
    const double slack = 1e-9 * step_[a];
    if (!(p[a] >= origin_[a] - slack && p[a] <= hi[a] + slack)) return false;
  }
  return true;
}

CellIndex nearest_cell(const GridSpec& grid, const Eigen::Vector3d& point) {
  if (!grid.contains_point(point)) throw std::out_of_range("point outside the grid domain");
  Index out[3];
  for (int a = 0; a < 3; ++a) {
    const double u = (point[a] - grid.origin()[a]) / grid.step()[a];
    // Lower index on exact ties: ceil(u - 0.5) maps u = m + 0.5 to m.
    auto idx = static_cast<Index>(std::ceil(u - 0.5));
    out[a] = std::clamp<Index>(idx, 0, grid.shape()[a] - 1);
  }
  return {out[0], out[1], out[2]};
}

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

double total_mass(const ConcentrationField& field) {
  return compensated_sum(field.span()) * field.grid().cell_volume();
}

Eigen::ArrayXXd slab_mean(const ConcentrationField& field, double z_center, double half_width) {
  const auto& g = field.grid();
  const double slack = 1e-9 * g.dz();
  std::vector<Index> levels;
  for (Index k = 0; k < g.nz(); ++k) {
    const double z = g.z(k);
    if (z >= z_center - half_width - slack && z <= z_center + half_width + slack) levels.push_back(k);
  }
  if (levels.empty()) throw std::invalid_argument("slab_mean: no grid level inside the slab");
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(g.nx(), g.ny());
  for (Index i = 0; i < g.nx(); ++i) {
    for (Index j = 0; j < g.ny(); ++j) {
      double s = 0.0;
      for (Index k : levels) s += field(i, j, k);
      out(i, j) = s / static_cast<double>(levels.size());
    }
  }
  return out;
}

}  // namespace hipv
