#include "hipv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "hipv/metrics.hpp"

namespace hipv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Runs fn(begin, end) over [first, last) split into contiguous chunks.
template <typename Fn>
void parallel_planes(Index first, Index last, unsigned workers, Fn&& fn) {
  const Index count = last - first;
  if (workers <= 1 || count < 2) {
    fn(first, last);
    return;
  }
  const auto w = static_cast<Index>(std::min<Index>(workers, count));
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(w - 1));
  const Index chunk = count / w, extra = count % w;
  Index begin = first;
  std::pair<Index, Index> mine{0, 0};
  for (Index t = 0; t < w; ++t) {
    const Index end = begin + chunk + (t < extra ? 1 : 0);
    if (t == 0) {
      mine = {begin, end};
    } else {
      pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    begin = end;
  }
  fn(mine.first, mine.second);
}

}  // namespace

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("solver: dt must be > 0");
  if (!(diffusion_coefficient >= 0.0) || !std::isfinite(diffusion_coefficient)) {
    throw std::invalid_argument("solver: diffusion_coefficient must be >= 0");
  }
  if (total_steps < 1) throw std::invalid_argument("solver: total_steps must be >= 1");
  if (!(noise_clamp_sigmas > 0.0)) throw std::invalid_argument("solver: noise_clamp_sigmas must be > 0");
  if (nan_check_interval < 1) throw std::invalid_argument("solver: nan_check_interval must be >= 1");
  if (workers < 1) throw std::invalid_argument("solver: workers must be >= 1");
}

std::string CflReport::describe() const {
  std::ostringstream os;
  os.precision(6);
  os << "dt = " << dt << " s; advective limit = " << advective_limit << " s ("
     << (advective_ok ? "ok" : "VIOLATED") << ", vmax = [" << vmax.x() << ", " << vmax.y() << ", " << vmax.z()
     << "] m/s); diffusive limit = " << diffusive_limit << " s (" << (diffusive_ok ? "ok" : "VIOLATED") << ")";
  return os.str();
}

CflReport check_cfl(const GridSpec& grid, const SolverConfig& config, const Eigen::Vector3d& vmax) {
  if ((vmax.array() < 0.0).any()) throw std::invalid_argument("check_cfl: vmax must be >= 0");
  CflReport r;
  r.dt = config.dt;
  r.vmax = vmax;
  r.advective_limit = kInf;
  for (int a = 0; a < 3; ++a) {
    if (vmax[a] > 0.0) r.advective_limit = std::min(r.advective_limit, grid.step()[a] / vmax[a]);
  }
  const double hmin = grid.step().minCoeff();
  r.diffusive_limit =
      config.diffusion_coefficient > 0.0 ? hmin * hmin / (2.0 * config.diffusion_coefficient * 3.0) : kInf;
  r.advective_ok = config.dt <= r.advective_limit;
  r.diffusive_ok = config.dt <= r.diffusive_limit;
  return r;
}

Eigen::Vector3d wind_velocity_bound(const WindModelParams& wind, const GridSpec& grid, double clamp_sigmas) {
  const double h = speed_bound(wind, clamp_sigmas);
  return {h, h, vertical_speed_bound(wind, grid.upper().z(), clamp_sigmas)};
}

double diffusion_term(const ConcentrationField& field, const CellIndex& c, double diffusion_coefficient) {
  const auto& g = field.grid();
  const double centre = field(c);
  const double lx = (field(c.i + 1, c.j, c.k) - 2.0 * centre + field(c.i - 1, c.j, c.k)) / (g.dx() * g.dx());
  const double ly = (field(c.i, c.j + 1, c.k) - 2.0 * centre + field(c.i, c.j - 1, c.k)) / (g.dy() * g.dy());
  const double lz = (field(c.i, c.j, c.k + 1) - 2.0 * centre + field(c.i, c.j, c.k - 1)) / (g.dz() * g.dz());
  return diffusion_coefficient * (lx + ly + lz);
}

double advection_term(const ConcentrationField& field, const CellIndex& c, const WindSample& v) {
  const auto& g = field.grid();
  const double centre = field(c);
  const double gx = v.x() >= 0.0 ? (centre - field(c.i - 1, c.j, c.k)) / g.dx() : (field(c.i + 1, c.j, c.k) - centre) / g.dx();
  const double gy = v.y() >= 0.0 ? (centre - field(c.i, c.j - 1, c.k)) / g.dy() : (field(c.i, c.j + 1, c.k) - centre) / g.dy();
  const double gz = v.z() >= 0.0 ? (centre - field(c.i, c.j, c.k - 1)) / g.dz() : (field(c.i, c.j, c.k + 1) - centre) / g.dz();
  return -(v.x() * gx + v.y() * gy + v.z() * gz);
}

Eigen::Vector3d sample_wind(const WindModelParams& params, const GridSpec& grid, double t, std::int64_t step,
                            WindBuffer& buffer, unsigned workers) {
  const WindFrame frame(params, t, step);
  const Index ny = grid.ny(), nz = grid.nz();
  std::vector<double> profile(static_cast<std::size_t>(nz));
  for (Index k = 0; k < nz; ++k) profile[static_cast<std::size_t>(k)] = frame.vertical_profile(grid.z(k));

  std::vector<Eigen::Vector3d> plane_max(static_cast<std::size_t>(grid.nx()), Eigen::Vector3d::Zero());
  auto& data = buffer.data();
  parallel_planes(0, grid.nx(), workers, [&](Index i0, Index i1) {
    for (Index i = i0; i < i1; ++i) {
      Eigen::Vector3d vmax = Eigen::Vector3d::Zero();
      for (Index j = 0; j < ny; ++j) {
        const Index base = grid.linear(i, j, 0);
        data.col(base).setZero();
        for (Index k = 1; k < nz; ++k) {
          const WindSample v = frame.sample(i, j, k, profile[static_cast<std::size_t>(k)]);
          data.col(base + k) = v;
          vmax = vmax.cwiseMax(v.cwiseAbs());
        }
      }
      plane_max[static_cast<std::size_t>(i)] = vmax;
    }
  });
  Eigen::Vector3d vmax = Eigen::Vector3d::Zero();
  for (const auto& m : plane_max) vmax = vmax.cwiseMax(m);
  return vmax;
}

void inject_sources(ConcentrationField& field, const std::vector<CellSource>& sources, const ReleaseModel& model,
                    Seconds t, Seconds dt, MassBudget& budget) {
  if (sources.empty()) return;
  const double per_sphere = incremental_release(model, t, Seconds{t.count + dt.count});
  const double inv_volume = 1.0 / field.grid().cell_volume();
  for (const auto& s : sources) {
    if (!field.grid().is_interior(s.cell)) throw std::out_of_range("inject_sources: source outside the domain interior");
    const double molecules = per_sphere * s.sphere_count;
    field(s.cell) += molecules * inv_volume;
    budget.released += molecules;
  }
}

void apply_boundaries(const ConcentrationField& prev, ConcentrationField& next, const WindBuffer& wind, double dt,
                      double diffusion_coefficient, MassBudget& budget) {
  const auto& g = prev.grid();
  if (!(next.grid() == g)) throw std::invalid_argument("apply_boundaries: fields on different grids");
  const Index nx = g.nx(), ny = g.ny(), nz = g.nz();
  const Index si = g.stride_i(), sj = g.stride_j();
  const double vol = g.cell_volume();
  const auto& p = prev.values();
  auto& q = next.values();
  const auto& w = wind.data();
  const double h[3] = {g.dx(), g.dy(), g.dz()};
  const Index stride[3] = {si, sj, 1};

  double ground = 0.0;
  double outflow = 0.0;

  // Transfer from interior node a to boundary neighbour b across a face with
  // outward axis `axis` and sign `sign` (+1 if b is on the high side).
  auto face = [&](Index a, int axis, int sign) {
    const Index b = a + sign * stride[axis];
    const double diff = diffusion_coefficient * dt * (p[a] - p[b]) / (h[axis] * h[axis]);
    const double vn = sign * w(axis, a);
    double adv = 0.0;
    if (vn > 0.0) {
      adv = dt * vn * p[a] / h[axis];
    } else if (vn < 0.0) {
      adv = dt * vn * p[b] / h[axis];
    }
    return (diff + adv) * vol;
  };

  for (Index i = 1; i + 1 < nx; ++i) {
    for (Index j = 1; j + 1 < ny; ++j) {
      const Index base = g.linear(i, j, 0);
      ground += face(base + 1, 2, -1);
      outflow += face(base + nz - 2, 2, +1);
      if (!(i == 1 || i == nx - 2 || j == 1 || j == ny - 2)) continue;
      for (Index k = 1; k + 1 < nz; ++k) {
        const Index a = base + k;
        if (i == 1) outflow += face(a, 0, -1);
        if (i == nx - 2) outflow += face(a, 0, +1);
        if (j == 1) outflow += face(a, 1, -1);
        if (j == ny - 2) outflow += face(a, 1, +1);
      }
    }
  }

  for (Index i = 0; i < nx; ++i) {
    const bool bi = i == 0 || i == nx - 1;
    for (Index j = 0; j < ny; ++j) {
      const bool bj = j == 0 || j == ny - 1;
      const Index base = g.linear(i, j, 0);
      ground += q[base] * vol;
      q[base] = 0.0;
      for (Index k = (bi || bj) ? 1 : nz - 1; k < nz; ++k) {
        const bool bk = k == nz - 1;
        const Index n = base + k;
        double val = q[n];
        if (bi) {
          const double vx = w(0, n);
          if (i == 0) {
            val = -vx > 0.0 ? val - dt * vx * (p[n + si] - p[n]) / h[0] : 0.0;
          } else {
            val = vx > 0.0 ? val - dt * vx * (p[n] - p[n - si]) / h[0] : 0.0;
          }
        }
        if (bj) {
          const double vy = w(1, n);
          if (j == 0) {
            val = -vy > 0.0 ? val - dt * vy * (p[n + sj] - p[n]) / h[1] : 0.0;
          } else {
            val = vy > 0.0 ? val - dt * vy * (p[n] - p[n - sj]) / h[1] : 0.0;
          }
        }
        if (bk) {
          const double vz = w(2, n);
          val = vz > 0.0 ? val - dt * vz * (p[n] - p[n - 1]) / h[2] : 0.0;
        }
        outflow += (q[n] - val) * vol;
        q[n] = val;
      }
    }
  }

  budget.absorbed_ground += ground;
  budget.boundary_outflow += outflow;
}

Simulation::Simulation(GridSpec grid, SolverConfig config, WindModelParams wind, ReleaseModel release,
                       std::vector<CellSource> sources)
    : grid_(grid),
      config_(config),
      wind_(wind),
      release_(release),
      sources_(std::move(sources)),
      current_(grid_),
      next_(grid_),
      wind_buffer_(grid_) {
  config_.validate();
  wind_.validate();
  release_.validate();
  for (const auto& s : sources_) {
    if (!grid_.is_interior(s.cell)) throw std::out_of_range("simulation: source outside the domain interior");
  }
}

void Simulation::set_field(const ConcentrationField& field) {
  if (!(field.grid() == grid_)) throw std::invalid_argument("simulation: field grid mismatch");
  current_ = field;
  budget_.in_domain = total_mass(current_);
}

void Simulation::interior_update() {
  const Index nx = grid_.nx(), ny = grid_.ny(), nz = grid_.nz();
  const Index si = grid_.stride_i(), sj = grid_.stride_j();
  const double dt = config_.dt, d = config_.diffusion_coefficient;
  const double idx = 1.0 / grid_.dx(), idy = 1.0 / grid_.dy(), idz = 1.0 / grid_.dz();
  const double idx2 = idx * idx, idy2 = idy * idy, idz2 = idz * idz;
  const double* p = current_.values().data();
  double* q = next_.values().data();
  const double* w = wind_buffer_.data().data();

  parallel_planes(1, nx - 1, config_.workers, [&](Index i0, Index i1) {
    for (Index i = i0; i < i1; ++i) {
      for (Index j = 1; j + 1 < ny; ++j) {
        const Index base = grid_.linear(i, j, 0);
        for (Index k = 1; k + 1 < nz; ++k) {
          const Index n = base + k;
          const double c = p[n];
          const double xm = p[n - si], xp = p[n + si];
          const double ym = p[n - sj], yp = p[n + sj];
          const double zm = p[n - 1], zp = p[n + 1];
          const double lap = (xp - 2.0 * c + xm) * idx2 + (yp - 2.0 * c + ym) * idy2 + (zp - 2.0 * c + zm) * idz2;
          const double vx = w[3 * n], vy = w[3 * n + 1], vz = w[3 * n + 2];
          const double gx = vx >= 0.0 ? (c - xm) * idx : (xp - c) * idx;
          const double gy = vy >= 0.0 ? (c - ym) * idy : (yp - c) * idy;
          const double gz = vz >= 0.0 ? (c - zm) * idz : (zp - c) * idz;
          q[n] = c + dt * (d * lap - (vx * gx + vy * gy + vz * gz));
        }
      }
    }
  });
}

bool Simulation::has_non_finite() const { return !current_.values().allFinite(); }

void Simulation::step() {
  const double t = current_.time();
  const double dt = config_.dt;

  const Eigen::Vector3d vmax = sample_wind(wind_, grid_, t, step_, wind_buffer_, config_.workers);
  stats_ = StepStats{};
  stats_.vmax = vmax;
  observed_vmax_ = observed_vmax_.cwiseMax(vmax);
  if (config_.cfl_runtime_check) {
    const auto report = check_cfl(grid_, config_, vmax);
    if (!report.advective_ok) {
      throw SolverAbort("runtime CFL violation at step " + std::to_string(step_) + ": " + report.describe(), step_);
    }
  }

  next_.values() = current_.values();
  interior_update();
  inject_sources(next_, sources_, release_, Seconds{t}, Seconds{dt}, budget_);
  apply_boundaries(current_, next_, wind_buffer_, dt, config_.diffusion_coefficient, budget_);

  auto& q = next_.values();
  const double floor_value = -1e-9 * std::max(q.maxCoeff(), 0.0);
  for (Index n = 0; n < q.size(); ++n) {
    if (q[n] < 0.0) {
      if (q[n] < floor_value) ++stats_.positivity_violations;
      ++stats_.clamped_nodes;
      q[n] = 0.0;
    }
  }

  next_.set_time(t + dt);
  std::swap(current_, next_);
  ++step_;
  budget_.in_domain = total_mass(current_);

  if (step_ % config_.nan_check_interval == 0 && has_non_finite()) {
    throw SolverAbort("non-finite concentration detected at step " + std::to_string(step_), step_);
  }
}

RunResult run(Simulation& sim, const RunPlan& plan, CeiAccumulator* cei,
              const std::function<void(const Simulation&)>& observer) {
  RunResult result;
  const std::int64_t steps = plan.steps >= 0 ? plan.steps : sim.config().total_steps;
  if (plan.budget_stride > 0 && steps > 0) result.budget_trace.push_back({sim.step_index(), sim.time(), sim.budget()});
  for (std::int64_t s = 0; s < steps; ++s) {
    if (cei) cei->accumulate(sim.field());
    sim.step();
    const std::int64_t done = sim.step_index();
    if (std::find(plan.snapshot_steps.begin(), plan.snapshot_steps.end(), done) != plan.snapshot_steps.end()) {
      result.snapshots.push_back(sim.field());
    }
    if (plan.budget_stride > 0 && (done % plan.budget_stride == 0 || s + 1 == steps)) {
      result.budget_trace.push_back({done, sim.time(), sim.budget()});
    }
    if (observer) observer(sim);
  }
  result.final_budget = sim.budget();
  result.steps = steps;
  return result;
}

}  // namespace hipv
