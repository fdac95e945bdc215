#include "hipv/kinetics.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "hipv/counter_rng.hpp"
#include "hipv/csv.hpp"

namespace hipv {

void ReleaseModel::validate() const {
  if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("release model: k must be > 0");
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("release model: n must be > 0");
  if (!(molecules_per_sphere >= 0.0) || !std::isfinite(molecules_per_sphere)) {
    throw std::invalid_argument("release model: molecules_per_sphere must be >= 0");
  }
}

Hours saturation_time(const ReleaseModel& model) {
  return Hours{std::pow(1.0 / model.k, 1.0 / model.n)};
}

double incremental_release(const ReleaseModel& model, Hours t_start, Hours t_end) {
  if (!(t_start.count >= 0.0) || !(t_end.count > t_start.count)) {
    throw std::invalid_argument("incremental_release: requires 0 <= t_start < t_end");
  }
  return model.molecules_per_sphere * (cumulative_fraction(model, t_end) - cumulative_fraction(model, t_start));
}

double incremental_release(const ReleaseModel& model, Seconds t_start, Seconds t_end) {
  if (!(t_start.count >= 0.0) || !(t_end.count > t_start.count)) {
    throw std::invalid_argument("incremental_release: requires 0 <= t_start < t_end");
  }
  return incremental_release(model, to_hours(t_start), to_hours(t_end));
}

void ReleaseDataset::validate() const {
  double previous = -1.0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& [t, f] = samples[s];
    if (!std::isfinite(t) || t < 0.0) {
      throw std::invalid_argument("release dataset: sample " + std::to_string(s) + " has negative time");
    }
    if (!(t > previous)) {
      throw std::invalid_argument("release dataset: times must be strictly increasing (sample " +
                                  std::to_string(s) + ")");
    }
    if (!(f >= 0.0 && f <= 1.0)) {
      throw std::invalid_argument("release dataset: fraction outside [0, 1] at sample " + std::to_string(s));
    }
    previous = t;
  }
}

namespace {

double sum_squared_residuals(const std::vector<ReleaseSample>& pts, double k, double n) {
  double ssr = 0.0;
  for (const auto& p : pts) {
    const double r = k * std::pow(p.time_hours, n) - p.fraction;
    ssr += r * r;
  }
  return ssr;
}

}  // namespace

KorsmeyerPeppasFit fit_korsmeyer_peppas(const ReleaseDataset& data, const FitOptions& options) {
  data.validate();

  std::vector<ReleaseSample> pts;
  std::size_t unsaturated = 0;
  bool any_below_one = false;
  for (const auto& s : data.samples) {
    if (s.time_hours <= 0.0) continue;
    pts.push_back(s);
    if (s.fraction > 0.0 && s.fraction < 1.0) ++unsaturated;
    if (s.fraction < 1.0) any_below_one = true;
  }
  if (!pts.empty() && !any_below_one) {
    throw std::invalid_argument("fit: every sample is saturated (fraction = 1)");
  }
  if (unsaturated < 3) {
    throw std::invalid_argument("fit: need at least 3 samples with t > 0 and 0 < fraction < 1");
  }

  KorsmeyerPeppasFit fit;

  // log f = log k + n log t over the unsaturated samples.
  {
    Eigen::MatrixXd a(unsaturated, 2);
    Eigen::VectorXd b(unsaturated);
    Eigen::Index row = 0;
    for (const auto& p : pts) {
      if (!(p.fraction > 0.0 && p.fraction < 1.0)) continue;
      a(row, 0) = 1.0;
      a(row, 1) = std::log(p.time_hours);
      b(row) = std::log(p.fraction);
      ++row;
    }
    const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
    fit.initial_k = std::exp(coef(0));
    fit.initial_n = coef(1);
  }

  const auto m = static_cast<Eigen::Index>(pts.size());
  Eigen::Vector2d p(fit.initial_k, fit.initial_n);
  if (!(p(1) > 0.0)) p(1) = 0.5;
  double ssr = sum_squared_residuals(pts, p(0), p(1));

  Eigen::MatrixXd jac(m, 2);
  Eigen::VectorXd res(m);
  auto linearize = [&](const Eigen::Vector2d& at) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double t = pts[static_cast<std::size_t>(i)].time_hours;
      const double tn = std::pow(t, at(1));
      jac(i, 0) = tn;
      jac(i, 1) = at(0) * tn * std::log(t);
      res(i) = at(0) * tn - pts[static_cast<std::size_t>(i)].fraction;
    }
  };

  int iter = 0;
  for (; iter < options.max_iterations && !fit.converged; ++iter) {
    linearize(p);
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Eigen::Vector2d g = jac.transpose() * res;
    const Eigen::Vector2d delta = -jtj.ldlt().solve(g);
    if (!delta.allFinite()) break;

    double scale = 1.0;
    Eigen::Vector2d trial = p + delta;
    double trial_ssr = std::numeric_limits<double>::infinity();
    for (int halving = 0; halving < 50; ++halving) {
      trial = p + scale * delta;
      if (trial(0) > 0.0 && trial(1) > 0.0) {
        trial_ssr = sum_squared_residuals(pts, trial(0), trial(1));
        if (trial_ssr <= ssr) break;
      }
      scale *= 0.5;
    }

    const Eigen::Vector2d step = trial - p;
    const double rel = std::max(std::abs(step(0)) / std::abs(p(0)), std::abs(step(1)) / std::abs(p(1)));
    if (trial_ssr <= ssr) {
      p = trial;
      ssr = trial_ssr;
    }
    if (rel < options.relative_tolerance || !(trial_ssr <= ssr)) fit.converged = true;
  }

  fit.k = p(0);
  fit.n = p(1);
  fit.iterations = iter;
  fit.samples_used = pts.size();
  fit.residual_sum_squares = ssr;

  double mean = 0.0;
  for (const auto& s : pts) mean += s.fraction;
  mean /= static_cast<double>(pts.size());
  double sst = 0.0;
  for (const auto& s : pts) sst += (s.fraction - mean) * (s.fraction - mean);
  fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : (ssr == 0.0 ? 1.0 : 0.0);

  if (m > 2) {
    linearize(p);
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const double s2 = ssr / static_cast<double>(m - 2);
    fit.covariance = s2 * jtj.inverse();
    const boost::math::students_t dist(static_cast<double>(m - 2));
    const double tq = boost::math::quantile(boost::math::complement(dist, 0.025));
    const Eigen::Vector2d half = tq * fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    fit.ci95_lower = p - half;
    fit.ci95_upper = p + half;
  }
  return fit;
}

ReleaseDataset synthetic_release_dataset(const ReleaseModel& model, const std::vector<double>& times_hours,
                                         double noise_sigma, std::uint64_t seed) {
  ReleaseDataset data;
  const std::uint64_t stream = counter_rng::step_key(seed, 0);
  for (std::size_t s = 0; s < times_hours.size(); ++s) {
    double f = cumulative_fraction(model, Hours{times_hours[s]});
    if (noise_sigma > 0.0) {
      f += noise_sigma * counter_rng::standard_normal_pair(counter_rng::site_key(stream, s, 0, 0)).first;
      f = std::clamp(f, 0.0, 1.0);
    }
    data.samples.push_back({times_hours[s], f});
  }
  return data;
}

ReleaseDataset parse_release_csv(std::istream& in) {
  const auto table = csv::read_table(in);
  const auto tc = table.column("time_hours");
  const auto fc = table.column("fraction");
  ReleaseDataset data;
  for (const auto& row : table.rows) data.samples.push_back({row[tc], row[fc]});
  data.validate();
  return data;
}

ReleaseDataset read_release_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open release dataset '" + path + "'");
  return parse_release_csv(in);
}

void write_release_csv(std::ostream& out, const ReleaseDataset& data) {
  out << "time_hours,fraction\n";
  for (const auto& s : data.samples) csv::write_row(out, {s.time_hours, s.fraction});
}

void write_fit_report(std::ostream& out, const KorsmeyerPeppasFit& fit) {
  using csv::format_double;
  out << "model = korsmeyer_peppas\n"
      << "k = " << format_double(fit.k) << "\n"
      << "n = " << format_double(fit.n) << "\n"
      << "r_squared = " << format_double(fit.r_squared) << "\n"
      << "residual_sum_squares = " << format_double(fit.residual_sum_squares) << "\n"
      << "samples_used = " << fit.samples_used << "\n"
      << "iterations = " << fit.iterations << "\n"
      << "converged = " << (fit.converged ? "true" : "false") << "\n"
      << "initial_k = " << format_double(fit.initial_k) << "\n"
      << "initial_n = " << format_double(fit.initial_n) << "\n"
      << "cov_kk = " << format_double(fit.covariance(0, 0)) << "\n"
      << "cov_kn = " << format_double(fit.covariance(0, 1)) << "\n"
      << "cov_nn = " << format_double(fit.covariance(1, 1)) << "\n"
      << "k_ci95 = " << format_double(fit.ci95_lower(0)) << " " << format_double(fit.ci95_upper(0)) << "\n"
      << "n_ci95 = " << format_double(fit.ci95_lower(1)) << " " << format_double(fit.ci95_upper(1)) << "\n";
}

void MicrosphereSpec::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string("microsphere spec: ") + name + " must be > 0");
  };
  positive(diameter, "diameter");
  positive(matrix_density, "matrix_density");
  positive(cargo_density, "cargo_density");
  positive(cargo_molar_mass, "cargo_molar_mass");
  if (!(cargo_mass_fraction > 0.0 && cargo_mass_fraction < 1.0)) {
    throw std::invalid_argument("microsphere spec: cargo_mass_fraction must lie in (0, 1)");
  }
}

MicrosphereInventory microsphere_inventory(const MicrosphereSpec& spec, double total_microsphere_mass_kg,
                                           double total_cargo_mass_kg) {
  spec.validate();
  if (!(total_microsphere_mass_kg > 0.0) || !(total_cargo_mass_kg > 0.0)) {
    throw std::invalid_argument("microsphere inventory: total masses must be > 0");
  }
  MicrosphereInventory inv;
  const double r = 0.5 * spec.diameter;
  inv.sphere_volume = 4.0 / 3.0 * std::numbers::pi * r * r * r;
  inv.effective_density =
      spec.cargo_mass_fraction * spec.cargo_density + (1.0 - spec.cargo_mass_fraction) * spec.matrix_density;
  inv.sphere_mass = inv.effective_density * inv.sphere_volume;
  inv.sphere_count = total_microsphere_mass_kg / inv.sphere_mass;
  inv.cargo_moles = total_cargo_mass_kg * 1e3 / spec.cargo_molar_mass;
  inv.cargo_molecule_count = inv.cargo_moles * kAvogadro;
  inv.molecules_per_sphere = inv.cargo_molecule_count / inv.sphere_count;
  return inv;
}

void GasPairSpec::validate() const {
  for (double v : {molar_mass_a, molar_mass_b, collision_diameter_a, collision_diameter_b, temperature, pressure,
                   collision_integral}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("gas pair: all fields must be > 0");
  }
}

double chapman_enskog_diffusion(const GasPairSpec& pair) {
  pair.validate();
  const double sigma = 0.5 * (pair.collision_diameter_a + pair.collision_diameter_b);
  const double d_cm2 = 0.0018583 * std::pow(pair.temperature, 1.5) *
                       std::sqrt(1.0 / pair.molar_mass_a + 1.0 / pair.molar_mass_b) /
                       (pair.pressure * sigma * sigma * pair.collision_integral);
  return d_cm2 * 1e-4;
}

double molar_volume(double molar_mass_g_per_mol, double density_g_per_cm3) {
  if (!(molar_mass_g_per_mol > 0.0) || !(density_g_per_cm3 > 0.0)) {
    throw std::invalid_argument("molar_volume: inputs must be > 0");
  }
  return molar_mass_g_per_mol / density_g_per_cm3;
}

double collision_diameter_from_molar_volume(double molar_mass_g_per_mol, double density_g_per_cm3) {
  return std::cbrt(molar_volume(molar_mass_g_per_mol, density_g_per_cm3));
}

}  // namespace hipv
