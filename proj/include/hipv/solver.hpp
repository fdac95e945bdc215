#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hipv/grid.hpp"
#include "hipv/kinetics.hpp"
#include "hipv/scenarios.hpp"
#include "hipv/wind.hpp"

namespace hipv {

class CeiAccumulator;

struct SolverConfig {
  double diffusion_coefficient = 1e-5;  // m^2/s
  double dt = 2.0;                      // s
  std::int64_t total_steps = 43200;
  bool cfl_runtime_check = true;
  double noise_clamp_sigmas = 3.0;
  std::int64_t nan_check_interval = 100;
  unsigned workers = 1;

  void validate() const;
};

/// Molecule bookkeeping across the domain boundary.
struct MassBudget {
  double released = 0.0;
  double in_domain = 0.0;
  double absorbed_ground = 0.0;
  double boundary_outflow = 0.0;

  /// released - in_domain - absorbed_ground - boundary_outflow
  double closure_error() const { return released - in_domain - absorbed_ground - boundary_outflow; }
};

struct CflReport {
  double dt = 0.0;
  Eigen::Vector3d vmax = Eigen::Vector3d::Zero();
  double advective_limit = 0.0;  // s; +inf when vmax is zero on every axis
  double diffusive_limit = 0.0;  // s; +inf when D = 0
  bool advective_ok = true;
  bool diffusive_ok = true;

  bool passed() const { return advective_ok && diffusive_ok; }
  std::string describe() const;
};

/// dt <= min_a(h_a / vmax_a) and dt <= min_a(h_a^2) / (6 D). An axis with zero
/// vmax imposes no advective limit.
CflReport check_cfl(const GridSpec& grid, const SolverConfig& config, const Eigen::Vector3d& vmax);

/// Per-axis velocity bound used by the pre-check: the clamped horizontal
/// speed bound on x and y and the vertical bound at the top of the grid.
Eigen::Vector3d wind_velocity_bound(const WindModelParams& wind, const GridSpec& grid, double clamp_sigmas);

/// D times the 7-point Laplacian at an interior node.
double diffusion_term(const ConcentrationField& field, const CellIndex& cell, double diffusion_coefficient);

/// -(v . grad C) at an interior node, each axis differenced upwind of the sign
/// of its velocity component (backward for v >= 0, forward for v < 0).
double advection_term(const ConcentrationField& field, const CellIndex& cell, const WindSample& wind);

/// Wind sampled at every node for one step; ground nodes hold zero.
class WindBuffer {
 public:
  WindBuffer() = default;
  explicit WindBuffer(const GridSpec& grid) : v_(3, grid.cell_count()) { v_.setZero(); }

  auto at(Index linear) { return v_.col(linear); }
  auto at(Index linear) const { return v_.col(linear); }
  Eigen::Matrix3Xd& data() { return v_; }
  const Eigen::Matrix3Xd& data() const { return v_; }

 private:
  Eigen::Matrix3Xd v_;
};

/// Fills `buffer` for step `step` at time t and returns max |v| per axis.
Eigen::Vector3d sample_wind(const WindModelParams& params, const GridSpec& grid, double t, std::int64_t step,
                            WindBuffer& buffer, unsigned workers = 1);

/// Adds the molecules released over [t, t + dt] by the spheres at each node,
/// divided by the cell volume, to `field`, and credits them to budget.released.
void inject_sources(ConcentrationField& field, const std::vector<CellSource>& sources, const ReleaseModel& model,
                    Seconds t, Seconds dt, MassBudget& budget);

/// Boundary pass for one step. `next` holds the interior update; its boundary
/// nodes hold whatever they held before the pass (normally `prev`).
///
/// Ground (k = 0) nodes are zeroed. Each lateral and top node applies, for
/// each axis on which it is a boundary node, in the order x, y, z, the
/// first-order outflow update C -= dt v (C_b - C_inner) / h when the outward
/// normal velocity is positive and sets C = 0 otherwise. Differences use
/// `prev`.
///
/// Accounting: mass removed from boundary nodes plus the mass each interior
/// node neighbouring a boundary node transferred across that face during the
/// interior update (diffusive and upwind advective parts, evaluated from
/// `prev`) goes to absorbed_ground for ground faces and nodes and to
/// boundary_outflow for the rest.
void apply_boundaries(const ConcentrationField& prev, ConcentrationField& next, const WindBuffer& wind, double dt,
                      double diffusion_coefficient, MassBudget& budget);

/// Raised when a run must stop: runtime CFL violation or a non-finite value.
class SolverAbort : public std::runtime_error {
 public:
  SolverAbort(const std::string& what, std::int64_t step) : std::runtime_error(what), step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

struct StepStats {
  Eigen::Vector3d vmax = Eigen::Vector3d::Zero();
  std::int64_t clamped_nodes = 0;
  /// Nodes that were below -1e-9 of the field maximum before clamping.
  std::int64_t positivity_violations = 0;
};

/// Forward-Euler integration of dC/dt = D lap C - v . grad C + S on a grid,
/// double-buffered: every step reads only the previous field.
class Simulation {
 public:
  Simulation(GridSpec grid, SolverConfig config, WindModelParams wind, ReleaseModel release,
             std::vector<CellSource> sources);

  /// Replaces the current field (values and time) and resets budget.in_domain
  /// to its mass; the step counter is untouched. The field must live on the
  /// simulation grid.
  void set_field(const ConcentrationField& field);

  /// One step: sample wind, interior update, sources, boundaries, clamp.
  /// Throws SolverAbort on a runtime CFL violation or a non-finite value.
  void step();

  const ConcentrationField& field() const { return current_; }
  const GridSpec& grid() const { return grid_; }
  const SolverConfig& config() const { return config_; }
  const WindModelParams& wind() const { return wind_; }
  const MassBudget& budget() const { return budget_; }
  const StepStats& last_stats() const { return stats_; }
  std::int64_t step_index() const { return step_; }
  double time() const { return current_.time(); }
  /// Largest |v| per axis seen in any step so far.
  const Eigen::Vector3d& observed_vmax() const { return observed_vmax_; }

 private:
  void interior_update();
  bool has_non_finite() const;

  GridSpec grid_;
  SolverConfig config_;
  WindModelParams wind_;
  ReleaseModel release_;
  std::vector<CellSource> sources_;
  ConcentrationField current_;
  ConcentrationField next_;
  WindBuffer wind_buffer_;
  MassBudget budget_;
  StepStats stats_;
  Eigen::Vector3d observed_vmax_ = Eigen::Vector3d::Zero();
  std::int64_t step_ = 0;
};

struct BudgetRow {
  std::int64_t step = 0;
  double time = 0.0;
  MassBudget budget;
};

struct RunPlan {
  std::vector<std::int64_t> snapshot_steps;  // field copies after these steps
  std::int64_t budget_stride = 1;            // 0 disables the trace
  std::int64_t steps = -1;                   // < 0: config().total_steps
};

struct RunResult {
  std::vector<ConcentrationField> snapshots;
  std::vector<BudgetRow> budget_trace;  // includes step 0
  MassBudget final_budget;
  std::int64_t steps = 0;
};

/// Runs plan.steps steps (config().total_steps when negative). Before each step the current field is
/// streamed into `cei` (a left Riemann sum of the coverage integral). The
/// optional observer is called after every step.
RunResult run(Simulation& sim, const RunPlan& plan, CeiAccumulator* cei = nullptr,
              const std::function<void(const Simulation&)>& observer = {});

}  // namespace hipv
