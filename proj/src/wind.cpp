#include "hipv/wind.hpp"

#include <stdexcept>

namespace hipv {

void WindModelParams::validate() const {
  if (!(mean_speed >= 0.0) || !std::isfinite(mean_speed)) throw std::invalid_argument("wind: mean_speed must be >= 0");
  if (!(speed_noise_variance >= 0.0) || !(direction_noise_variance >= 0.0)) {
    throw std::invalid_argument("wind: noise variances must be >= 0");
  }
  if (!(reference_height > 0.0)) throw std::invalid_argument("wind: reference_height must be > 0");
  if (!(diurnal_period > 0.0)) throw std::invalid_argument("wind: diurnal_period must be > 0");
  if (!std::isfinite(diurnal_amplitude) || !std::isfinite(vertical_scale)) {
    throw std::invalid_argument("wind: diurnal_amplitude and vertical_scale must be finite");
  }
}

WindSample wind_at(const WindModelParams& params, std::int64_t i, std::int64_t j, std::int64_t k, double z,
                   double t, std::int64_t step) {
  const WindFrame frame(params, t, step);
  return frame.sample(i, j, k, frame.vertical_profile(z));
}

double speed_bound(const WindModelParams& params, double clamp_sigmas) {
  if (!(clamp_sigmas > 0.0)) throw std::invalid_argument("speed_bound: clamp_sigmas must be > 0");
  return params.mean_speed * (1.0 + std::abs(params.diurnal_amplitude)) *
         (1.0 + clamp_sigmas * std::sqrt(params.speed_noise_variance));
}

double vertical_speed_bound(const WindModelParams& params, double z_max, double clamp_sigmas) {
  return std::abs(params.vertical_scale) * speed_bound(params, clamp_sigmas) *
         std::log1p(std::max(z_max, 0.0) / params.reference_height);
}

}  // namespace hipv
