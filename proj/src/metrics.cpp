#include "hipv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hipv {

Subvolume Subvolume::from_bounds(const GridSpec& grid, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
  Index l[3], h[3];
  for (int a = 0; a < 3; ++a) {
    const double o = grid.origin()[a], d = grid.step()[a];
    const double slack = 1e-9;
    l[a] = std::max<Index>(0, static_cast<Index>(std::ceil((lo[a] - o) / d - slack)));
    h[a] = std::min<Index>(grid.shape()[a] - 1, static_cast<Index>(std::floor((hi[a] - o) / d + slack)));
    if (h[a] < l[a]) throw std::invalid_argument("subvolume contains no grid nodes");
  }
  return box({l[0], l[1], l[2]}, {h[0], h[1], h[2]});
}

Index Subvolume::cell_count(const GridSpec& grid) const {
  if (whole_domain) return grid.cell_count();
  return (hi.i - lo.i + 1) * (hi.j - lo.j + 1) * (hi.k - lo.k + 1);
}

std::vector<double> log_spaced_thresholds(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw std::invalid_argument("log_spaced_thresholds: need 0 < lo < hi and count >= 2");
  }
  std::vector<double> out(count);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t c = 0; c < count; ++c) {
    out[c] = std::pow(10.0, a + (b - a) * static_cast<double>(c) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

CeiAccumulator::CeiAccumulator(GridSpec grid, std::vector<double> thresholds, Subvolume subvolume,
                               double sample_interval, std::int64_t history_stride)
    : grid_(grid),
      thresholds_(std::move(thresholds)),
      subvolume_(subvolume),
      sample_interval_(sample_interval),
      history_stride_(history_stride) {
  if (thresholds_.empty()) throw std::invalid_argument("CEI: need at least one threshold");
  for (std::size_t t = 0; t < thresholds_.size(); ++t) {
    if (!(thresholds_[t] > 0.0) || !std::isfinite(thresholds_[t])) throw std::invalid_argument("CEI: thresholds must be > 0");
    if (t && !(thresholds_[t] > thresholds_[t - 1])) throw std::invalid_argument("CEI: thresholds must be strictly increasing");
  }
  if (!subvolume_.whole_domain) {
    if (!grid_.contains(subvolume_.lo) || !grid_.contains(subvolume_.hi) || subvolume_.hi.i < subvolume_.lo.i ||
        subvolume_.hi.j < subvolume_.lo.j || subvolume_.hi.k < subvolume_.lo.k) {
      throw std::invalid_argument("CEI: subvolume outside the grid");
    }
  }
  if (!(sample_interval_ > 0.0)) throw std::invalid_argument("CEI: sample interval must be > 0");
  cells_ = subvolume_.cell_count(grid_);
  sums_.assign(thresholds_.size(), 0);
  bucket_.assign(thresholds_.size() + 1, 0);
}

void CeiAccumulator::accumulate(const ConcentrationField& field) {
  if (!(field.grid() == grid_)) throw std::invalid_argument("CEI: field grid does not match the accumulator");

  // bucket_[b] counts nodes with exactly b thresholds <= C.
  std::fill(bucket_.begin(), bucket_.end(), 0);
  const double lowest = thresholds_.front();
  auto tally = [&](double c) {
    if (!(c >= lowest)) {
      ++bucket_[0];
      return;
    }
    const auto b = std::upper_bound(thresholds_.begin(), thresholds_.end(), c) - thresholds_.begin();
    ++bucket_[static_cast<std::size_t>(b)];
  };

  const auto& v = field.values();
  if (subvolume_.whole_domain) {
    for (Index n = 0; n < v.size(); ++n) tally(v[n]);
  } else {
    for (Index i = subvolume_.lo.i; i <= subvolume_.hi.i; ++i) {
      for (Index j = subvolume_.lo.j; j <= subvolume_.hi.j; ++j) {
        const Index base = grid_.linear(i, j, 0);
        for (Index k = subvolume_.lo.k; k <= subvolume_.hi.k; ++k) tally(v[base + k]);
      }
    }
  }

  std::int64_t covered = 0;
  for (std::size_t t = thresholds_.size(); t-- > 0;) {
    covered += bucket_[t + 1];
    sums_[t] += covered;
  }
  ++steps_seen_;
  if (history_stride_ > 0 && steps_seen_ % history_stride_ == 0) history_.push_back({steps_seen_, sums_});
}

CeiResult finalize(const CeiAccumulator& acc) {
  if (acc.steps_seen() < 1) throw std::logic_error("CEI: no samples accumulated");
  CeiResult r;
  r.thresholds = acc.thresholds();
  r.cei.resize(r.thresholds.size());
  const double samples = static_cast<double>(acc.steps_seen());
  const double denom = samples * static_cast<double>(acc.cell_count());
  for (std::size_t t = 0; t < r.cei.size(); ++t) r.cei[t] = static_cast<double>(acc.running_counts()[t]) / denom;
  r.elapsed = samples * acc.sample_interval();
  return r;
}

std::vector<CeiPoint> cei_timeseries(const CeiAccumulator& acc, double threshold) {
  const auto& th = acc.thresholds();
  const auto it = std::find_if(th.begin(), th.end(),
                               [&](double v) { return std::abs(v - threshold) <= 1e-12 * std::abs(threshold); });
  if (it == th.end()) throw std::invalid_argument("CEI: threshold is not tracked by the accumulator");
  const auto t = static_cast<std::size_t>(it - th.begin());
  std::vector<CeiPoint> out;
  out.reserve(acc.history().size());
  for (const auto& row : acc.history()) {
    const double n = static_cast<double>(row.steps);
    out.push_back({n * acc.sample_interval(), static_cast<double>(row.counts[t]) / (n * static_cast<double>(acc.cell_count()))});
  }
  return out;
}

}  // namespace hipv
