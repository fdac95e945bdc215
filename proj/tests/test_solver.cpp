#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "hipv/metrics.hpp"
#include "hipv/solver.hpp"

using namespace hipv;

namespace {

WindModelParams calm() {
  WindModelParams p;
  p.mean_speed = 0.0;
  return p;
}

const ReleaseModel kRelease{0.4429, 0.1789, 1.121e15};

std::vector<CellSource> central(double spheres = 1000.0) { return {{CellIndex{20, 20, 1}, spheres}}; }

}  // namespace

TEST(Cfl, PaperLimits) {
  const auto g = GridSpec::paper_field();
  const SolverConfig cfg;
  const auto r = check_cfl(g, cfg, wind_velocity_bound(WindModelParams{}, g, 3.0));
  EXPECT_TRUE(r.passed());
  EXPECT_NEAR(r.advective_limit, 5.0 / (0.75 * (1.0 + 3.0 * std::sqrt(0.03))), 1e-9);
  EXPECT_NEAR(r.advective_limit, 4.387, 1e-3);
  EXPECT_NEAR(r.diffusive_limit, 0.25 / 6e-5, 1e-6);
}

TEST(Cfl, FiveSecondsViolatesAdvective) {
  const auto g = GridSpec::paper_field();
  SolverConfig cfg;
  cfg.dt = 5.0;
  const auto r = check_cfl(g, cfg, wind_velocity_bound(WindModelParams{}, g, 3.0));
  EXPECT_FALSE(r.advective_ok);
  EXPECT_TRUE(r.diffusive_ok);
  EXPECT_NE(r.describe().find("VIOLATED"), std::string::npos);
}

TEST(Cfl, NoTransportMeansNoLimit) {
  SolverConfig cfg;
  cfg.diffusion_coefficient = 0.0;
  const auto r = check_cfl(GridSpec::paper_field(), cfg, Eigen::Vector3d::Zero());
  EXPECT_EQ(r.advective_limit, std::numeric_limits<double>::infinity());
  EXPECT_EQ(r.diffusive_limit, std::numeric_limits<double>::infinity());
  EXPECT_TRUE(r.passed());
}

TEST(Cfl, RejectsNegativeVelocityBound) {
  EXPECT_THROW(check_cfl(GridSpec::paper_field(), SolverConfig{}, Eigen::Vector3d(-1, 0, 0)), std::invalid_argument);
}

TEST(SolverConfig, Validation) {
  SolverConfig c;
  c.dt = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.diffusion_coefficient = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.workers = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(DiffusionTerm, QuadraticField) {
  const auto g = GridSpec::paper_field();
  ConcentrationField fx(g), fall(g);
  for (Index i = 0; i < g.nx(); ++i)
    for (Index j = 0; j < g.ny(); ++j)
      for (Index k = 0; k < g.nz(); ++k) {
        fx(i, j, k) = g.x(i) * g.x(i);
        fall(i, j, k) = g.x(i) * g.x(i) + g.y(j) * g.y(j) + g.z(k) * g.z(k);
      }
  EXPECT_NEAR(diffusion_term(fx, {7, 9, 3}, 1.0), 2.0, 1e-9);
  EXPECT_NEAR(diffusion_term(fall, {30, 12, 6}, 0.5), 3.0, 1e-9);
}

TEST(DiffusionTerm, Impulse) {
  const auto g = GridSpec::paper_field();
  ConcentrationField f(g);
  f(20, 20, 5) = 8.0;
  EXPECT_NEAR(diffusion_term(f, {20, 20, 5}, 1.0), -2.0 * 8.0 * (1.0 / 25 + 1.0 / 25 + 4.0), 1e-12);
  EXPECT_NEAR(diffusion_term(f, {20, 20, 6}, 1.0), 8.0 / 0.25, 1e-12);
  EXPECT_NEAR(diffusion_term(f, {21, 20, 5}, 1.0), 8.0 / 25.0, 1e-12);
}

TEST(AdvectionTerm, LinearFieldBothSigns) {
  const auto g = GridSpec::paper_field();
  ConcentrationField f(g);
  for (Index i = 0; i < g.nx(); ++i)
    for (Index j = 0; j < g.ny(); ++j)
      for (Index k = 0; k < g.nz(); ++k) f(i, j, k) = 3.0 * g.x(i) - 2.0 * g.y(j) + 4.0 * g.z(k);
  for (double s : {0.7, -0.7}) {
    EXPECT_NEAR(advection_term(f, {10, 10, 4}, WindSample(s, 0, 0)), -3.0 * s, 1e-12);
    EXPECT_NEAR(advection_term(f, {10, 10, 4}, WindSample(0, s, 0)), 2.0 * s, 1e-12);
    EXPECT_NEAR(advection_term(f, {10, 10, 4}, WindSample(0, 0, s)), -4.0 * s, 1e-12);
  }
}

TEST(AdvectionTerm, UsesUpwindNeighbour) {
  const auto g = GridSpec::paper_field();
  ConcentrationField f(g);
  f(11, 10, 4) = 5.0;
  EXPECT_EQ(advection_term(f, {10, 10, 4}, WindSample(1.0, 0, 0)), 0.0);
  EXPECT_NEAR(advection_term(f, {10, 10, 4}, WindSample(-1.0, 0, 0)), 1.0, 1e-15);
}

TEST(InjectSources, FirstHourFromOneNode) {
  const auto g = GridSpec::paper_field();
  ConcentrationField f(g);
  MassBudget b;
  inject_sources(f, central(10.0), kRelease, Seconds{0.0}, Seconds{3600.0}, b);
  const double molecules = 10.0 * 0.4429 * 1.121e15;
  EXPECT_NEAR(b.released, molecules, 1e-9 * molecules);
  EXPECT_NEAR(f(20, 20, 1), molecules / 12.5, 1e-9 * molecules);
  EXPECT_NEAR(total_mass(f), molecules, 1e-9 * molecules);
}

TEST(InjectSources, EmptyDeploymentLeavesFieldUnchanged) {
  ConcentrationField f(GridSpec::paper_field(), 2.0);
  MassBudget b;
  inject_sources(f, {}, kRelease, Seconds{0.0}, Seconds{2.0}, b);
  EXPECT_TRUE((f.values() == 2.0).all());
  EXPECT_EQ(b.released, 0.0);
}

TEST(InjectSources, RejectsBoundaryNode) {
  ConcentrationField f(GridSpec::paper_field());
  MassBudget b;
  EXPECT_THROW(inject_sources(f, {{CellIndex{20, 20, 0}, 1.0}}, kRelease, Seconds{0.0}, Seconds{2.0}, b),
               std::out_of_range);
}

TEST(Boundaries, ZeroWindZeroesBoundaryAndConserves) {
  const auto g = GridSpec::paper_field();
  const ConcentrationField prev(g, 1.0);
  ConcentrationField next = prev;
  const WindBuffer w(g);
  MassBudget b;
  apply_boundaries(prev, next, w, 2.0, 1e-5, b);
  for (Index i = 0; i < g.nx(); ++i)
    for (Index j = 0; j < g.ny(); ++j)
      for (Index k = 0; k < g.nz(); ++k) {
        EXPECT_EQ(next(i, j, k), g.is_interior({i, j, k}) ? 1.0 : 0.0);
      }
  EXPECT_DOUBLE_EQ(b.absorbed_ground, 41.0 * 41.0 * 12.5);
  EXPECT_NEAR(total_mass(next) + b.absorbed_ground + b.boundary_outflow, total_mass(prev), 1e-9);
}

TEST(Boundaries, GroundNodeGoesToAbsorbed) {
  const auto g = GridSpec::paper_field();
  const ConcentrationField prev(g);
  ConcentrationField next = prev;
  next(12, 13, 0) = 4.0;
  MassBudget b;
  apply_boundaries(prev, next, WindBuffer(g), 2.0, 0.0, b);
  EXPECT_EQ(next(12, 13, 0), 0.0);
  EXPECT_DOUBLE_EQ(b.absorbed_ground, 4.0 * 12.5);
  EXPECT_EQ(b.boundary_outflow, 0.0);
}

TEST(Boundaries, OutflowOfUniformFieldIsUnchanged) {
  const auto g = GridSpec::paper_field();
  const ConcentrationField prev(g, 3.0);
  ConcentrationField next = prev;
  WindBuffer w(g);
  w.data().row(0).setConstant(1.0);
  MassBudget b;
  apply_boundaries(prev, next, w, 2.0, 0.0, b);
  EXPECT_EQ(next(g.nx() - 1, 5, 5), 3.0);
  EXPECT_EQ(next(0, 5, 5), 0.0);
  EXPECT_EQ(next(5, 0, 5), 0.0);
  EXPECT_EQ(next(5, 5, g.nz() - 1), 0.0);
}

TEST(Boundaries, OutflowCarriesGradient) {
  const auto g = GridSpec::paper_field();
  ConcentrationField prev(g);
  for (Index i = 0; i < g.nx(); ++i)
    for (Index j = 0; j < g.ny(); ++j)
      for (Index k = 0; k < g.nz(); ++k) prev(i, j, k) = static_cast<double>(i);
  ConcentrationField next = prev;
  WindBuffer w(g);
  w.data().row(0).setConstant(0.5);
  MassBudget b;
  apply_boundaries(prev, next, w, 2.0, 0.0, b);
  EXPECT_DOUBLE_EQ(next(40, 7, 4), 40.0 - 2.0 * 0.5 * 1.0 / 5.0);
}

TEST(Boundaries, RejectsMismatchedGrids) {
  const ConcentrationField a(GridSpec::paper_field());
  ConcentrationField c(GridSpec::from_extents(0, 10, 0, 10, 0, 10, 1, 1, 1));
  MassBudget b;
  EXPECT_THROW(apply_boundaries(a, c, WindBuffer(a.grid()), 2.0, 0.0, b), std::invalid_argument);
}

TEST(Simulation, ZeroFieldIsFixedPoint) {
  Simulation sim(GridSpec::paper_field(), SolverConfig{}, WindModelParams{}, kRelease, {});
  for (int s = 0; s < 20; ++s) sim.step();
  EXPECT_TRUE((sim.field().values() == 0.0).all());
  EXPECT_EQ(sim.budget().boundary_outflow, 0.0);
  EXPECT_DOUBLE_EQ(sim.time(), 40.0);
}

TEST(Simulation, OneStepImpulseSpread) {
  const auto g = GridSpec::paper_field();
  SolverConfig cfg;
  cfg.diffusion_coefficient = 0.01;
  Simulation sim(g, cfg, calm(), kRelease, {});
  ConcentrationField f(g);
  f(20, 20, 5) = 1.0;
  sim.set_field(f);
  sim.step();
  const double a = 2.0 * 0.01;
  EXPECT_NEAR(sim.field()(20, 20, 5), 1.0 - a * 2.0 * (1.0 / 25 + 1.0 / 25 + 4.0), 1e-15);
  EXPECT_NEAR(sim.field()(21, 20, 5), a / 25.0, 1e-15);
  EXPECT_NEAR(sim.field()(20, 19, 5), a / 25.0, 1e-15);
  EXPECT_NEAR(sim.field()(20, 20, 6), a / 0.25, 1e-15);
  EXPECT_NEAR(total_mass(sim.field()), 12.5, 1e-12);
}

TEST(Simulation, ZeroWindClosure) {
  Simulation sim(GridSpec::paper_field(), SolverConfig{}, calm(), kRelease, central());
  double worst = 0.0;
  for (int s = 0; s < 1800; ++s) {
    sim.step();
    const auto& b = sim.budget();
    worst = std::max(worst, std::abs(b.closure_error()) / b.released);
  }
  EXPECT_LT(worst, 1e-9);
  EXPECT_GT(sim.budget().absorbed_ground, 0.0);
}

TEST(Simulation, ClosureWithDiffusionReachingEveryBoundary) {
  const auto g = GridSpec::from_extents(-3, 3, -3, 3, 0, 3, 1, 1, 1);
  SolverConfig cfg;
  cfg.diffusion_coefficient = 0.1;
  cfg.dt = 1.0;
  Simulation sim(g, cfg, calm(), kRelease, {{CellIndex{3, 3, 1}, 1.0}});
  for (int s = 0; s < 200; ++s) {
    sim.step();
    EXPECT_LT(std::abs(sim.budget().closure_error()), 1e-9 * sim.budget().released);
  }
  EXPECT_GT(sim.budget().boundary_outflow, 0.0);
  EXPECT_GT(sim.budget().absorbed_ground, 0.0);
}

TEST(Simulation, StaysNonNegativeUnderNoisyWind) {
  WindModelParams w;
  w.seed = 8;
  Simulation sim(GridSpec::paper_field(), SolverConfig{}, w, kRelease, central());
  for (int s = 0; s < 300; ++s) {
    sim.step();
    ASSERT_GE(sim.field().values().minCoeff(), 0.0);
  }
  EXPECT_GT(sim.field().values().maxCoeff(), 0.0);
}

TEST(Simulation, TranslationEquivariant) {
  const auto g = GridSpec::paper_field();
  Simulation a(g, SolverConfig{}, calm(), kRelease, {{CellIndex{18, 20, 2}, 5.0}});
  Simulation b(g, SolverConfig{}, calm(), kRelease, {{CellIndex{19, 20, 2}, 5.0}});
  for (int s = 0; s < 100; ++s) {
    a.step();
    b.step();
  }
  const double peak = a.field().values().maxCoeff();
  for (Index i = 1; i + 2 < g.nx(); ++i)
    for (Index j = 0; j < g.ny(); ++j)
      for (Index k = 0; k < g.nz(); ++k) {
        const double x = a.field()(i, j, k), y = b.field()(i + 1, j, k);
        ASSERT_NEAR(x, y, 1e-13 * peak);
      }
}

TEST(Simulation, IndependentOfWorkerCount) {
  const auto g = GridSpec::paper_field();
  WindModelParams w;
  w.seed = 3;
  SolverConfig one, many;
  many.workers = 3;
  Simulation a(g, one, w, kRelease, central());
  Simulation b(g, many, w, kRelease, central());
  for (int s = 0; s < 50; ++s) {
    a.step();
    b.step();
  }
  EXPECT_EQ(std::memcmp(a.field().values().data(), b.field().values().data(), sizeof(double) * g.cell_count()), 0);
  EXPECT_EQ(a.budget().boundary_outflow, b.budget().boundary_outflow);
}

TEST(Simulation, RuntimeCflAbort) {
  SolverConfig cfg;
  WindModelParams w;
  w.mean_speed = 3.0;
  Simulation sim(GridSpec::paper_field(), cfg, w, kRelease, {});
  try {
    for (int s = 0; s < 1000; ++s) sim.step();
    FAIL() << "expected an abort";
  } catch (const SolverAbort& e) {
    EXPECT_NE(std::string(e.what()).find("CFL"), std::string::npos);
    EXPECT_EQ(e.step(), sim.step_index());
  }
}

TEST(Simulation, NonFiniteAbort) {
  const auto g = GridSpec::paper_field();
  SolverConfig cfg;
  cfg.nan_check_interval = 1;
  Simulation sim(g, cfg, calm(), kRelease, {});
  ConcentrationField f(g);
  f(10, 10, 5) = std::numeric_limits<double>::quiet_NaN();
  sim.set_field(f);
  EXPECT_THROW(sim.step(), SolverAbort);
}

TEST(Simulation, RejectsBoundarySource) {
  EXPECT_THROW(Simulation(GridSpec::paper_field(), SolverConfig{}, calm(), kRelease, {{CellIndex{0, 5, 5}, 1.0}}),
               std::out_of_range);
}

TEST(Run, ZeroStepsGivesEmptyTrace) {
  Simulation sim(GridSpec::paper_field(), SolverConfig{}, calm(), kRelease, central());
  RunPlan plan;
  plan.steps = 0;
  const auto r = run(sim, plan);
  EXPECT_TRUE(r.budget_trace.empty());
  EXPECT_EQ(r.steps, 0);
  EXPECT_EQ(sim.step_index(), 0);
}

TEST(Run, TraceSnapshotsAndStreaming) {
  const auto g = GridSpec::paper_field();
  Simulation sim(g, SolverConfig{}, calm(), kRelease, central());
  RunPlan plan;
  plan.steps = 25;
  plan.budget_stride = 10;
  plan.snapshot_steps = {5, 25};
  CeiAccumulator acc(g, {1.0}, Subvolume::whole(), 2.0);
  int observed = 0;
  const auto r = run(sim, plan, &acc, [&](const Simulation&) { ++observed; });
  EXPECT_EQ(observed, 25);
  EXPECT_EQ(acc.steps_seen(), 25);
  ASSERT_EQ(r.budget_trace.size(), 4u);
  EXPECT_EQ(r.budget_trace[0].step, 0);
  EXPECT_EQ(r.budget_trace[1].step, 10);
  EXPECT_EQ(r.budget_trace[3].step, 25);
  ASSERT_EQ(r.snapshots.size(), 2u);
  EXPECT_DOUBLE_EQ(r.snapshots[0].time(), 10.0);
  EXPECT_DOUBLE_EQ(r.snapshots[1].time(), 50.0);
  EXPECT_EQ(r.final_budget.released, sim.budget().released);
}
