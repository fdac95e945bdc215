#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "hipv/commands.hpp"
#include "hipv/field_io.hpp"

namespace hipv {

namespace {

// Viridis control points.
constexpr std::array<std::array<double, 3>, 6> kStops{{{68, 1, 84},
                                                        {65, 68, 135},
                                                        {42, 120, 142},
                                                        {34, 168, 132},
                                                        {122, 209, 81},
                                                        {253, 231, 37}}};

std::array<unsigned char, 3> colour(double u) {
  u = std::clamp(u, 0.0, 1.0) * static_cast<double>(kStops.size() - 1);
  const auto a = std::min<std::size_t>(static_cast<std::size_t>(u), kStops.size() - 2);
  const double f = u - static_cast<double>(a);
  std::array<unsigned char, 3> c{};
  for (int ch = 0; ch < 3; ++ch) {
    c[static_cast<std::size_t>(ch)] =
        static_cast<unsigned char>(std::lround(kStops[a][static_cast<std::size_t>(ch)] * (1.0 - f) +
                                               kStops[a + 1][static_cast<std::size_t>(ch)] * f));
  }
  return c;
}

void put(Image& img, int px, int py, const std::array<unsigned char, 3>& c) {
  const auto o = 3 * (static_cast<std::size_t>(py) * static_cast<std::size_t>(img.width) + static_cast<std::size_t>(px));
  std::copy(c.begin(), c.end(), img.rgb.begin() + static_cast<std::ptrdiff_t>(o));
}

}  // namespace

Image render_slab(const Eigen::ArrayXXd& slab, const RenderOptions& options) {
  if (options.scale < 1) throw std::invalid_argument("render: scale must be >= 1");
  if (slab.size() == 0) throw std::invalid_argument("render: empty slab");
  if (!slab.allFinite()) throw std::invalid_argument("render: slab has non-finite values");

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Index n = 0; n < slab.size(); ++n) {
    if (slab(n) > 0.0) {
      lo = std::min(lo, std::log10(slab(n)));
      hi = std::max(hi, std::log10(slab(n)));
    }
  }
  if (options.log_min) lo = *options.log_min;
  if (options.log_max) hi = *options.log_max;
  const double span = (std::isfinite(lo) && std::isfinite(hi) && hi > lo) ? hi - lo : 0.0;

  const auto nx = static_cast<int>(slab.rows()), ny = static_cast<int>(slab.cols());
  Image img;
  img.width = nx * options.scale;
  img.height = ny * options.scale;
  img.rgb.assign(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height) * 3, 0);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double v = slab(i, j);
      double u = 0.0;
      if (v > 0.0) u = span > 0.0 ? (std::log10(v) - lo) / span : (std::log10(v) >= hi ? 1.0 : 0.0);
      const auto c = colour(u);
      for (int a = 0; a < options.scale; ++a) {
        for (int b = 0; b < options.scale; ++b) put(img, i * options.scale + a, (ny - 1 - j) * options.scale + b, c);
      }
    }
  }
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()), static_cast<std::streamsize>(image.rgb.size()));
}

void cmd_render(const std::filesystem::path& input, const std::filesystem::path& output, const RenderOptions& options) {
  if (!std::filesystem::exists(input)) throw std::runtime_error("render: no such file '" + input.string() + "'");

  Eigen::ArrayXXd slab;
  Eigen::VectorXd xs, ys;
  if (input.extension() == ".bin") {
    const ConcentrationField field = read_snapshot(input.string());
    slab = slab_mean(field, options.slab_z, options.slab_half_width);
    const auto& g = field.grid();
    xs = Eigen::VectorXd::LinSpaced(g.nx(), g.origin().x(), g.upper().x());
    ys = Eigen::VectorXd::LinSpaced(g.ny(), g.origin().y(), g.upper().y());
  } else {
    const SlabTable t = read_slab_csv(input.string());
    slab = t.values;
    xs = t.x.matrix();
    ys = t.y.matrix();
  }

  Image img = render_slab(slab, options);
  if (options.deployment_csv) {
    const Deployment d = read_deployment_csv(options.deployment_csv->string());
    auto nearest = [](const Eigen::VectorXd& axis, double v) {
      Index best = 0;
      (axis.array() - v).abs().minCoeff(&best);
      return static_cast<int>(best);
    };
    for (const auto& s : d.sources) {
      if (s.sphere_count == 0) continue;
      const int i = nearest(xs, s.position.x()), j = nearest(ys, s.position.y());
      for (int a = 0; a < options.scale; ++a) {
        for (int b = 0; b < options.scale; ++b) {
          const bool rim = a == 0 || b == 0 || a == options.scale - 1 || b == options.scale - 1;
          if (options.scale < 3 || rim) {
            put(img, i * options.scale + a, (static_cast<int>(ys.size()) - 1 - j) * options.scale + b, {255, 255, 255});
          }
        }
      }
    }
  }
  write_ppm(output, img);
}

}  // namespace hipv
