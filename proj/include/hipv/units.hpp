#pragma once

namespace hipv {

inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kAvogadro = 6.022e23;

// Time strong types. Release parameters are published in hours; the solver
// runs in seconds. Conversions happen only through these.
struct Hours {
  double count = 0.0;
  constexpr auto operator<=>(const Hours&) const = default;
};

struct Seconds {
  double count = 0.0;
  constexpr auto operator<=>(const Seconds&) const = default;
};

constexpr Hours to_hours(Seconds s) { return Hours{s.count / kSecondsPerHour}; }
constexpr Seconds to_seconds(Hours h) { return Seconds{h.count * kSecondsPerHour}; }

}  // namespace hipv
