#include <gtest/gtest.h>

#include <random>

#include "hipv/metrics.hpp"
#include "hipv/solver.hpp"

using namespace hipv;

namespace {

const GridSpec kGrid = GridSpec::paper_field();

ConcentrationField random_field(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> expo(0.0, 16.0);
  std::bernoulli_distribution zero(0.2);
  ConcentrationField f(g);
  for (Index n = 0; n < f.values().size(); ++n) f.values()[n] = zero(rng) ? 0.0 : std::pow(10.0, expo(rng));
  return f;
}

}  // namespace

TEST(Thresholds, LogSpaced) {
  const auto t = log_spaced_thresholds(1e4, 1e14, 11);
  ASSERT_EQ(t.size(), 11u);
  for (std::size_t a = 0; a < t.size(); ++a) EXPECT_NEAR(t[a], std::pow(10.0, 4.0 + a), 1e-12 * t[a]);
  EXPECT_EQ(t.front(), 1e4);
  EXPECT_EQ(t.back(), 1e14);
  EXPECT_THROW(log_spaced_thresholds(0.0, 1.0, 3), std::invalid_argument);
  EXPECT_THROW(log_spaced_thresholds(1.0, 10.0, 1), std::invalid_argument);
}

TEST(Cei, HalfCoveredField) {
  ConcentrationField f(kGrid);
  for (Index n = 0; n < f.values().size(); n += 2) f.values()[n] = 5.0;
  CeiAccumulator acc(kGrid, {1.0, 5.0, 6.0});
  acc.accumulate(f);
  const auto r = finalize(acc);
  const double covered = static_cast<double>((kGrid.cell_count() + 1) / 2) / kGrid.cell_count();
  EXPECT_DOUBLE_EQ(r.cei[0], covered);
  EXPECT_DOUBLE_EQ(r.cei[1], covered);
  EXPECT_EQ(r.cei[2], 0.0);
}

TEST(Cei, ConstantFieldOverTime) {
  CeiAccumulator acc(kGrid, {1.0, 10.0}, Subvolume::whole(), 2.0);
  const ConcentrationField f(kGrid, 3.0);
  for (int s = 0; s < 7; ++s) acc.accumulate(f);
  const auto r = finalize(acc);
  EXPECT_EQ(r.cei[0], 1.0);
  EXPECT_EQ(r.cei[1], 0.0);
  EXPECT_DOUBLE_EQ(r.elapsed, 14.0);
}

TEST(Cei, CoveredThenEmptyAveragesToHalf) {
  CeiAccumulator acc(kGrid, {1.0});
  const ConcentrationField on(kGrid, 2.0), off(kGrid);
  for (int s = 0; s < 10; ++s) acc.accumulate(on);
  for (int s = 0; s < 10; ++s) acc.accumulate(off);
  EXPECT_EQ(finalize(acc).cei[0], 0.5);
}

TEST(Cei, TimeseriesFlatForConstantField) {
  CeiAccumulator acc(kGrid, {1.0, 100.0}, Subvolume::whole(), 2.0, 5);
  ConcentrationField f(kGrid);
  for (Index n = 0; n < f.values().size(); n += 4) f.values()[n] = 50.0;
  for (int s = 0; s < 23; ++s) acc.accumulate(f);
  const auto ts = cei_timeseries(acc, 1.0);
  ASSERT_EQ(ts.size(), 4u);
  for (std::size_t a = 0; a < ts.size(); ++a) {
    EXPECT_DOUBLE_EQ(ts[a].time, 10.0 * (a + 1));
    EXPECT_DOUBLE_EQ(ts[a].cei, ts[0].cei);
  }
  EXPECT_GT(ts[0].cei, 0.0);
  EXPECT_EQ(cei_timeseries(acc, 100.0).back().cei, 0.0);
  EXPECT_THROW(cei_timeseries(acc, 3.0), std::invalid_argument);
}

TEST(Cei, BoundedAndMonotoneOnRandomFields) {
  const auto th = log_spaced_thresholds(1e4, 1e14, 11);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CeiAccumulator acc(kGrid, th);
    for (int s = 0; s < 3; ++s) acc.accumulate(random_field(kGrid, seed * 10 + s));
    const auto r = finalize(acc);
    for (std::size_t a = 0; a < r.cei.size(); ++a) {
      EXPECT_GE(r.cei[a], 0.0);
      EXPECT_LE(r.cei[a], 1.0);
      if (a) EXPECT_LE(r.cei[a], r.cei[a - 1]);
    }
  }
}

TEST(Cei, ThresholdIsInclusive) {
  CeiAccumulator acc(kGrid, {1e10});
  acc.accumulate(ConcentrationField(kGrid, 1e10));
  EXPECT_EQ(finalize(acc).cei[0], 1.0);
}

TEST(Cei, SubvolumePartitionConsistent) {
  const auto th = log_spaced_thresholds(1e4, 1e14, 11);
  const auto lo = Subvolume::box({0, 0, 0}, {19, 40, 10});
  const auto hi = Subvolume::box({20, 0, 0}, {40, 40, 10});
  CeiAccumulator whole(kGrid, th), a(kGrid, th, lo), b(kGrid, th, hi);
  for (int s = 0; s < 4; ++s) {
    const auto f = random_field(kGrid, 100 + s);
    whole.accumulate(f);
    a.accumulate(f);
    b.accumulate(f);
  }
  const auto rw = finalize(whole), ra = finalize(a), rb = finalize(b);
  const double wa = static_cast<double>(lo.cell_count(kGrid)) / kGrid.cell_count();
  const double wb = static_cast<double>(hi.cell_count(kGrid)) / kGrid.cell_count();
  for (std::size_t t = 0; t < th.size(); ++t) EXPECT_NEAR(wa * ra.cei[t] + wb * rb.cei[t], rw.cei[t], 1e-14);
}

TEST(Cei, StreamingMatchesBruteForce) {
  const auto g = GridSpec::from_extents(-4, 4, -4, 4, 0, 8, 1, 1, 1);
  SolverConfig cfg;
  cfg.dt = 0.5;
  cfg.diffusion_coefficient = 0.05;
  WindModelParams w;
  w.mean_speed = 0.4;
  w.reference_height = 8.0;
  Simulation sim(g, cfg, w, ReleaseModel{0.4429, 0.1789, 1e12}, {{CellIndex{4, 4, 1}, 100.0}});
  const auto th = log_spaced_thresholds(1e4, 1e14, 11);
  CeiAccumulator acc(g, th, Subvolume::whole(), cfg.dt);
  std::vector<ConcentrationField> frames;
  RunPlan plan;
  plan.steps = 50;
  frames.push_back(sim.field());
  run(sim, plan, &acc, [&](const Simulation& s) { frames.push_back(s.field()); });
  frames.pop_back();
  ASSERT_EQ(frames.size(), 50u);

  const auto r = finalize(acc);
  for (std::size_t t = 0; t < th.size(); ++t) {
    std::int64_t count = 0;
    for (const auto& f : frames) count += (f.values() >= th[t]).count();
    EXPECT_EQ(r.cei[t], static_cast<double>(count) / (50.0 * g.cell_count()));
  }
  EXPECT_GT(r.cei[0], 0.0);
}

TEST(Subvolume, FromBounds) {
  const auto s = Subvolume::from_bounds(kGrid, {-50, -50, 0}, {50, 50, 2});
  EXPECT_EQ(s.lo, (CellIndex{10, 10, 0}));
  EXPECT_EQ(s.hi, (CellIndex{30, 30, 4}));
  EXPECT_EQ(s.cell_count(kGrid), 21 * 21 * 5);
  EXPECT_EQ(Subvolume::from_bounds(kGrid, {-1, -1, 0}, {1, 1, 0.4}).cell_count(kGrid), 1);
  EXPECT_THROW(Subvolume::from_bounds(kGrid, {1, 1, 0}, {2, 2, 1}), std::invalid_argument);
}

TEST(Cei, Errors) {
  EXPECT_THROW(CeiAccumulator(kGrid, {}), std::invalid_argument);
  EXPECT_THROW(CeiAccumulator(kGrid, {2.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(CeiAccumulator(kGrid, {0.0}), std::invalid_argument);
  EXPECT_THROW(CeiAccumulator(kGrid, {1.0}, Subvolume::box({0, 0, 0}, {41, 0, 0})), std::invalid_argument);
  CeiAccumulator acc(kGrid, {1.0});
  EXPECT_THROW(finalize(acc), std::logic_error);
  EXPECT_THROW(acc.accumulate(ConcentrationField(GridSpec::from_extents(0, 2, 0, 2, 0, 2, 1, 1, 1))),
               std::invalid_argument);
}
