#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>

#include "hipv/counter_rng.hpp"

namespace hipv {

/// Stochastic diurnal wind. Noise terms are zero-mean Gaussians given by
/// their variances.
struct WindModelParams {
  double mean_speed = 0.5;                // m/s
  double diurnal_amplitude = 0.5;
  double diurnal_period = 86400.0;        // s
  double speed_noise_variance = 0.03;
  double direction_noise_variance = 1.5;  // rad^2
  double vertical_scale = 0.1;
  double reference_height = 5.0;          // m
  std::uint64_t seed = 0;

  void validate() const;
};

/// Velocity (vx, vy, vz) in m/s.
using WindSample = Eigen::Vector3d;

inline double diurnal_factor(double t, double period) {
  return std::sin(2.0 * std::numbers::pi * t / period);
}

/// Everything about the wind that is shared by all cells of one time step.
/// Cells draw their noise from the (seed, step) stream, so sample() is a pure
/// function of (i, j, k) and can be called in any order.
class WindFrame {
 public:
  WindFrame(const WindModelParams& params, double t, std::int64_t step)
      : params_(params),
        stream_(counter_rng::step_key(params.seed, static_cast<std::uint64_t>(step))),
        base_speed_(params.mean_speed * (1.0 + params.diurnal_amplitude * diurnal_factor(t, params.diurnal_period))),
        base_angle_(2.0 * std::numbers::pi * t / params.diurnal_period),
        speed_sigma_(std::sqrt(params.speed_noise_variance)),
        direction_sigma_(std::sqrt(params.direction_noise_variance)),
        noisy_(params.speed_noise_variance > 0.0 || params.direction_noise_variance > 0.0) {
    cos_base_ = std::cos(base_angle_);
    sin_base_ = std::sin(base_angle_);
  }

  /// ln(1 + z / z_ref), the vertical-profile factor for height z. Heights
  /// below the ground datum get 0.
  double vertical_profile(double z) const { return std::log1p((z > 0.0 ? z : 0.0) / params_.reference_height); }

  /// Wind at cell (i, j, k) whose height has profile factor `profile`.
  WindSample sample(std::int64_t i, std::int64_t j, std::int64_t k, double profile) const {
    double speed = base_speed_;
    double c = cos_base_;
    double s = sin_base_;
    if (noisy_) {
      const auto [zs, zd] = counter_rng::standard_normal_pair(counter_rng::site_key(
          stream_, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(k)));
      const double factor = 1.0 + speed_sigma_ * zs;
      speed *= factor > 0.0 ? factor : 0.0;
      const double theta = base_angle_ + direction_sigma_ * zd;
      c = std::cos(theta);
      s = std::sin(theta);
    }
    return {speed * c, speed * s, params_.vertical_scale * speed * profile};
  }

  /// The (eta_speed, eta_dir) pair drawn for a cell.
  std::pair<double, double> noise(std::int64_t i, std::int64_t j, std::int64_t k) const {
    const auto [zs, zd] = counter_rng::standard_normal_pair(counter_rng::site_key(
        stream_, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(k)));
    return {speed_sigma_ * zs, direction_sigma_ * zd};
  }

  double base_speed() const { return base_speed_; }
  double base_angle() const { return base_angle_; }

 private:
  WindModelParams params_;
  std::uint64_t stream_;
  double base_speed_;
  double base_angle_;
  double speed_sigma_;
  double direction_sigma_;
  bool noisy_;
  double cos_base_ = 1.0;
  double sin_base_ = 0.0;
};

/// Wind at cell (i, j, k), height z, time t of the given step.
WindSample wind_at(const WindModelParams& params, std::int64_t i, std::int64_t j, std::int64_t k, double z,
                   double t, std::int64_t step);

/// Bound on |vx| and |vy| with the speed noise clipped at clamp_sigmas.
double speed_bound(const WindModelParams& params, double clamp_sigmas = 3.0);

/// Matching bound on |vz| below height z_max.
double vertical_speed_bound(const WindModelParams& params, double z_max, double clamp_sigmas = 3.0);

}  // namespace hipv
