#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hipv/units.hpp"

namespace hipv {

// ---------------------------------------------------------------------------
// Korsmeyer-Peppas release
// ---------------------------------------------------------------------------

/// Power-law release M(t)/M_inf = k t^n with t in hours, plus the mean cargo
/// of one microsphere in molecules.
struct ReleaseModel {
  double k = 0.4429;   // h^-n
  double n = 0.1789;
  double molecules_per_sphere = 0.0;

  void validate() const;
};

/// Cumulative released fraction, clamped to [0, 1].
template <typename Scalar>
Scalar cumulative_fraction(Scalar k, Scalar n, Scalar t_hours) {
  using std::pow;
  if (t_hours <= Scalar(0)) return Scalar(0);
  const Scalar f = k * pow(t_hours, n);
  return f < Scalar(1) ? f : Scalar(1);
}

inline double cumulative_fraction(const ReleaseModel& model, Hours t) {
  return cumulative_fraction<double>(model.k, model.n, t.count);
}

inline double cumulative_fraction(const ReleaseModel& model, Seconds t) {
  return cumulative_fraction(model, to_hours(t));
}

/// Time at which k t^n reaches 1; the release is flat afterwards.
Hours saturation_time(const ReleaseModel& model);

/// Molecules released by one microsphere over [t_start, t_end]. Throws
/// std::invalid_argument unless 0 <= t_start < t_end.
double incremental_release(const ReleaseModel& model, Hours t_start, Hours t_end);
double incremental_release(const ReleaseModel& model, Seconds t_start, Seconds t_end);

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

struct ReleaseSample {
  double time_hours = 0.0;
  double fraction = 0.0;
};

struct ReleaseDataset {
  std::vector<ReleaseSample> samples;

  /// Strictly increasing non-negative times, fractions in [0, 1].
  void validate() const;
};

struct FitOptions {
  double relative_tolerance = 1e-9;
  int max_iterations = 100;
};

struct KorsmeyerPeppasFit {
  double k = 0.0;
  double n = 0.0;
  double r_squared = 0.0;
  double residual_sum_squares = 0.0;
  int iterations = 0;
  bool converged = false;
  std::size_t samples_used = 0;
  /// Asymptotic covariance s^2 (J^T J)^-1 of (k, n), s^2 = SSR / (m - 2).
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
  /// Student-t 95% intervals from the covariance diagonal.
  Eigen::Vector2d ci95_lower = Eigen::Vector2d::Zero();
  Eigen::Vector2d ci95_upper = Eigen::Vector2d::Zero();
  /// Starting point from the log-log regression.
  double initial_k = 0.0;
  double initial_n = 0.0;
};

/// Least squares on the untransformed model k t^n over all samples with t > 0.
/// Starts from a log-log regression over samples with 0 < fraction < 1 and
/// refines with step-halving Gauss-Newton. A fit that hits the iteration cap
/// returns its best iterate with converged = false.
///
/// Throws std::invalid_argument when fewer than three samples lie strictly
/// inside (0, 1) or when every sample is saturated.
KorsmeyerPeppasFit fit_korsmeyer_peppas(const ReleaseDataset& data, const FitOptions& options = {});

/// Samples of the model at the given times, with optional additive Gaussian
/// noise on the fraction (clipped back to [0, 1]).
ReleaseDataset synthetic_release_dataset(const ReleaseModel& model, const std::vector<double>& times_hours,
                                         double noise_sigma = 0.0, std::uint64_t seed = 0);

/// Two-column CSV with header `time_hours,fraction`.
ReleaseDataset read_release_csv(const std::string& path);
ReleaseDataset parse_release_csv(std::istream& in);
void write_release_csv(std::ostream& out, const ReleaseDataset& data);

/// Plain-text `key = value` report.
void write_fit_report(std::ostream& out, const KorsmeyerPeppasFit& fit);

// ---------------------------------------------------------------------------
// Microsphere inventory
// ---------------------------------------------------------------------------

struct MicrosphereSpec {
  double diameter = 180e-6;          // m, Dv(50)
  double matrix_density = 900.0;     // kg/m^3
  double cargo_density = 1174.0;     // kg/m^3
  double cargo_mass_fraction = 0.1;  // loading
  double cargo_molar_mass = 152.149; // g/mol

  void validate() const;
};

struct MicrosphereInventory {
  double sphere_volume = 0.0;      // m^3
  double effective_density = 0.0;  // kg/m^3
  double sphere_mass = 0.0;        // kg
  double sphere_count = 0.0;
  double cargo_moles = 0.0;
  double cargo_molecule_count = 0.0;
  double molecules_per_sphere = 0.0;
};

MicrosphereInventory microsphere_inventory(const MicrosphereSpec& spec, double total_microsphere_mass_kg,
                                           double total_cargo_mass_kg);

// ---------------------------------------------------------------------------
// Gas-phase diffusion
// ---------------------------------------------------------------------------

struct GasPairSpec {
  double molar_mass_a = 152.149;       // g/mol
  double molar_mass_b = 28.97;         // g/mol
  double collision_diameter_a = 5.06;  // Angstrom
  double collision_diameter_b = 3.7;   // Angstrom
  double temperature = 298.0;          // K
  double pressure = 1.0;               // atm
  double collision_integral = 1.0;

  void validate() const;
};

/// Chapman-Enskog binary diffusion coefficient in m^2/s.
///
/// The kinetic-theory correlation D = 0.0018583 T^1.5 sqrt(1/M_A + 1/M_B) /
/// (P sigma_AB^2 Omega_D) yields cm^2/s for T in K, M in g/mol, P in atm and
/// sigma in Angstrom; the result is scaled by 1e-4 to m^2/s. sigma_AB is the
/// arithmetic mean of the two collision diameters.
double chapman_enskog_diffusion(const GasPairSpec& pair);

/// Molar volume M / rho in cm^3/mol.
double molar_volume(double molar_mass_g_per_mol, double density_g_per_cm3);

/// Collision diameter estimate in Angstrom, taken as the cube root of the
/// molar volume in cm^3/mol.
double collision_diameter_from_molar_volume(double molar_mass_g_per_mol, double density_g_per_cm3);

}  // namespace hipv
