#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "hipv/grid.hpp"

namespace hipv {

/// Axis-aligned block of nodes, inclusive on both ends.
struct Subvolume {
  CellIndex lo;
  CellIndex hi;
  bool whole_domain = true;

  static Subvolume whole() { return {}; }
  static Subvolume box(CellIndex lo, CellIndex hi) { return {lo, hi, false}; }
  /// Nodes whose coordinates fall inside [lo, hi] (metres).
  static Subvolume from_bounds(const GridSpec& grid, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi);

  Index cell_count(const GridSpec& grid) const;
};

/// Log-spaced thresholds from lo to hi inclusive.
std::vector<double> log_spaced_thresholds(double lo, double hi, std::size_t count);

/// Streaming coverage effectiveness index. Each accumulate() adds, per
/// threshold, the number of subvolume nodes with C >= threshold; the CEI is
/// that count over (nodes x samples), the mean covered fraction.
class CeiAccumulator {
 public:
  /// `sample_interval` is the time each sample stands for (the solver dt);
  /// `history_stride` > 0 records running sums every that many samples.
  CeiAccumulator(GridSpec grid, std::vector<double> thresholds, Subvolume subvolume = Subvolume::whole(),
                 double sample_interval = 1.0, std::int64_t history_stride = 0);

  /// Throws std::invalid_argument if the field lives on a different grid.
  void accumulate(const ConcentrationField& field);

  const std::vector<double>& thresholds() const { return thresholds_; }
  /// Covered node count per threshold, summed over samples.
  const std::vector<std::int64_t>& running_counts() const { return sums_; }
  std::int64_t steps_seen() const { return steps_seen_; }
  double sample_interval() const { return sample_interval_; }
  const GridSpec& grid() const { return grid_; }
  const Subvolume& subvolume() const { return subvolume_; }
  Index cell_count() const { return cells_; }

  struct HistoryRow {
    std::int64_t steps = 0;
    std::vector<std::int64_t> counts;
  };
  const std::vector<HistoryRow>& history() const { return history_; }

 private:
  GridSpec grid_;
  std::vector<double> thresholds_;
  Subvolume subvolume_;
  double sample_interval_;
  std::int64_t history_stride_;
  Index cells_;
  std::vector<std::int64_t> sums_;
  std::vector<std::int64_t> bucket_;
  std::int64_t steps_seen_ = 0;
  std::vector<HistoryRow> history_;
};

struct CeiResult {
  std::vector<double> thresholds;
  std::vector<double> cei;  // per threshold
  double elapsed = 0.0;     // s covered by the average
};

/// Throws std::logic_error if nothing was accumulated.
CeiResult finalize(const CeiAccumulator& acc);

struct CeiPoint {
  double time = 0.0;  // s, end of the averaging window
  double cei = 0.0;
};

/// Running CEI for one threshold at each recorded history row. The threshold
/// is matched to 1e-12 relative; throws std::invalid_argument if it is not
/// one of the accumulator's.
std::vector<CeiPoint> cei_timeseries(const CeiAccumulator& acc, double threshold);

}  // namespace hipv
