#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "hipv/scenarios.hpp"

using namespace hipv;

namespace {

const GridSpec kGrid = GridSpec::paper_field();

std::int64_t total(const Deployment& d) {
  std::int64_t n = 0;
  for (const auto& s : d.sources) n += s.sphere_count;
  return n;
}

std::set<Index> node_set(const Deployment& d) {
  std::set<Index> s;
  for (const auto& c : map_sources(d, kGrid)) s.insert(kGrid.linear(c.cell));
  return s;
}

}  // namespace

TEST(Preset, NamesRoundTrip) {
  for (Preset p : kAllPresets) EXPECT_EQ(preset_from_string(to_string(p)), p);
  EXPECT_FALSE(preset_from_string("diagonal").has_value());
}

TEST(BuildDeployment, CountsConserved) {
  for (Preset p : kAllPresets) {
    for (std::int64_t n : {1LL, 3LL, 7LL, 1000LL, 706230983LL}) {
      const auto d = build_deployment(p, n, kGrid);
      EXPECT_EQ(total(d), n) << to_string(p) << " " << n;
      EXPECT_EQ(d.total_spheres, n);
      for (const auto& s : d.sources) EXPECT_GE(s.sphere_count, 0);
    }
  }
}

TEST(BuildDeployment, FourCornersGroups) {
  const std::int64_t n = 706230984;
  const auto d = build_deployment(Preset::four_corners, n, kGrid);
  ASSERT_EQ(d.sources.size() % 4, 0u);
  const std::size_t per = d.sources.size() / 4;
  const Eigen::Vector2d expected[4] = {{-39.5, -1.5}, {-39.5, 1.5}, {39.5, -1.5}, {39.5, 1.5}};
  for (std::size_t g = 0; g < 4; ++g) {
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    std::int64_t count = 0;
    for (std::size_t a = 0; a < per; ++a) {
      const auto& s = d.sources[g * per + a];
      centroid += s.position.head<2>();
      count += s.sphere_count;
    }
    centroid /= static_cast<double>(per);
    EXPECT_NEAR((centroid - expected[g]).norm(), 0.0, 1e-12);
    EXPECT_EQ(count, n / 4);
  }
}

TEST(BuildDeployment, FourCornersRemainderGoesToFirstPatches) {
  const auto d = build_deployment(Preset::four_corners, 6, kGrid);
  std::int64_t first = 0, last = 0;
  const std::size_t per = d.sources.size() / 4;
  for (std::size_t a = 0; a < per; ++a) {
    first += d.sources[a].sphere_count;
    last += d.sources[3 * per + a].sphere_count;
  }
  EXPECT_EQ(first, 2);
  EXPECT_EQ(last, 1);
}

TEST(BuildDeployment, CentralCoarseLattice) {
  StripeLayout layout;
  layout.lattice_pitch = 2.0;
  const auto d = build_deployment(Preset::central_patch, 4, kGrid, layout);
  ASSERT_EQ(d.sources.size(), 4u);
  const Eigen::Vector2d expected[4] = {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  for (std::size_t a = 0; a < 4; ++a) {
    EXPECT_EQ(d.sources[a].position.head<2>(), expected[a]);
    EXPECT_EQ(d.sources[a].position.z(), 0.5);
    EXPECT_EQ(d.sources[a].sphere_count, 1);
  }
}

TEST(BuildDeployment, LatticeRemainderInScanOrder) {
  StripeLayout layout;
  layout.lattice_pitch = 2.0;
  const auto d = build_deployment(Preset::central_patch, 6, kGrid, layout);
  EXPECT_EQ(d.sources[0].sphere_count, 2);
  EXPECT_EQ(d.sources[1].sphere_count, 2);
  EXPECT_EQ(d.sources[2].sphere_count, 1);
  EXPECT_EQ(d.sources[3].sphere_count, 1);
}

TEST(BuildDeployment, PointSymmetric) {
  for (Preset p : kAllPresets) {
    const auto d = build_deployment(p, 1, kGrid);
    std::set<std::pair<long long, long long>> pts, mirrored;
    for (const auto& s : d.sources) {
      const auto x = std::llround(s.position.x() * 1e6), y = std::llround(s.position.y() * 1e6);
      pts.insert({x, y});
      mirrored.insert({-x, -y});
    }
    EXPECT_EQ(pts, mirrored) << to_string(p);
  }
}

TEST(BuildDeployment, InsideStripeAtReleaseHeight) {
  for (Preset p : kAllPresets) {
    for (const auto& s : build_deployment(p, 1000, kGrid).sources) {
      EXPECT_LE(std::abs(s.position.x()), 40.0);
      EXPECT_LE(std::abs(s.position.y()), 2.0);
      EXPECT_EQ(s.position.z(), 0.5);
    }
  }
}

TEST(BuildDeployment, PerimeterOnBandCentreline) {
  const auto d = build_deployment(Preset::perimeter_stripe, 1000, kGrid);
  for (const auto& s : d.sources) {
    const double ax = std::abs(s.position.x()), ay = std::abs(s.position.y());
    const bool on_long = std::abs(ay - 1.75) < 1e-9 && ax <= 39.75 + 1e-9;
    const bool on_short = std::abs(ax - 39.75) < 1e-9 && ay <= 1.75 + 1e-9;
    EXPECT_TRUE(on_long || on_short) << s.position.transpose();
  }
}

TEST(BuildDeployment, Errors) {
  EXPECT_THROW(build_deployment(Preset::central_patch, 0, kGrid), std::invalid_argument);
  StripeLayout far;
  far.corner_offset = {45.0, 1.5};
  EXPECT_THROW(build_deployment(Preset::four_corners, 10, kGrid, far), std::invalid_argument);
  StripeLayout big;
  big.central_patch_size = 6.0;
  EXPECT_THROW(build_deployment(Preset::central_patch, 10, kGrid, big), std::invalid_argument);
  StripeLayout ground;
  ground.release_height = 0.0;
  EXPECT_THROW(build_deployment(Preset::uniform_patch, 10, kGrid, ground), std::invalid_argument);
  const auto small = GridSpec::from_extents(-10, 10, -10, 10, 0, 2, 1, 1, 0.5);
  EXPECT_THROW(build_deployment(Preset::uniform_patch, 10, small), std::invalid_argument);
}

TEST(MapSources, PaperGridNodes) {
  for (Preset p : kAllPresets) {
    const auto cells = map_sources(build_deployment(p, 706230983, kGrid), kGrid);
    double sum = 0.0;
    for (std::size_t a = 0; a < cells.size(); ++a) {
      EXPECT_EQ(cells[a].cell.k, 1);
      EXPECT_EQ(cells[a].cell.j, 20);
      if (a > 0) EXPECT_LT(kGrid.linear(cells[a - 1].cell), kGrid.linear(cells[a].cell));
      sum += cells[a].sphere_count;
    }
    EXPECT_EQ(sum, 706230983.0);
  }
  EXPECT_EQ(map_sources(build_deployment(Preset::central_patch, 10, kGrid), kGrid).size(), 1u);
}

TEST(MapSources, UniformAndPerimeterShareNodes) {
  const auto u = node_set(build_deployment(Preset::uniform_patch, 1000, kGrid));
  const auto p = node_set(build_deployment(Preset::perimeter_stripe, 1000, kGrid));
  EXPECT_EQ(u, p);
  EXPECT_EQ(u.size(), 17u);
}

TEST(MapSources, BoundaryNodeRejected) {
  Deployment d;
  d.sources = {{Eigen::Vector3d(0, 0, 0.1), 1}};
  d.total_spheres = 1;
  EXPECT_THROW(map_sources(d, kGrid), std::out_of_range);
  d.sources = {{Eigen::Vector3d(99, 0, 1), 1}};
  EXPECT_THROW(map_sources(d, kGrid), std::out_of_range);
}

TEST(Deployment, Validate) {
  Deployment d;
  d.sources = {{Eigen::Vector3d(0, 0, 1), 2}, {Eigen::Vector3d(1, 0, 1), 3}};
  d.total_spheres = 5;
  EXPECT_NO_THROW(d.validate(kGrid));
  d.total_spheres = 6;
  EXPECT_THROW(d.validate(kGrid), std::invalid_argument);
  d.total_spheres = 5;
  d.sources[0].position.z() = 0.0;
  EXPECT_THROW(d.validate(kGrid), std::invalid_argument);
  d.sources[0].position = {0, 150, 1};
  EXPECT_THROW(d.validate(kGrid), std::invalid_argument);
}

TEST(DeploymentCsv, RoundTrip) {
  const auto d = build_deployment(Preset::perimeter_stripe, 12345, kGrid);
  std::stringstream ss;
  write_deployment_csv(ss, d);
  EXPECT_EQ(ss.str().substr(0, 19), "x,y,z,sphere_count\n");
  const auto back = parse_deployment_csv(ss);
  ASSERT_EQ(back.sources.size(), d.sources.size());
  EXPECT_EQ(back.total_spheres, d.total_spheres);
  for (std::size_t a = 0; a < d.sources.size(); ++a) {
    EXPECT_EQ(back.sources[a].position, d.sources[a].position);
    EXPECT_EQ(back.sources[a].sphere_count, d.sources[a].sphere_count);
  }
}

TEST(DeploymentCsv, RejectsFractionalCounts) {
  std::stringstream ss("x,y,z,sphere_count\n0,0,1,2.5\n");
  EXPECT_THROW(parse_deployment_csv(ss), std::invalid_argument);
  EXPECT_ANY_THROW(read_deployment_csv("/nonexistent/deployment.csv"));
}
