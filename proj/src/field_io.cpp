#include "hipv/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

#include "hipv/csv.hpp"

namespace hipv {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("snapshot: truncated header");
  return v;
}

}  // namespace

void write_snapshot(std::ostream& out, const ConcentrationField& field) {
  const auto& g = field.grid();
  out.write(kSnapshotMagic, sizeof(kSnapshotMagic));
  put<std::uint32_t>(out, kSnapshotVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.nx()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.ny()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.nz()));
  for (int a = 0; a < 3; ++a) put<double>(out, g.step()[a]);
  for (int a = 0; a < 3; ++a) put<double>(out, g.origin()[a]);
  put<double>(out, field.time());
  out.write(reinterpret_cast<const char*>(field.values().data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(field.values().size())));
  if (!out) throw std::runtime_error("snapshot: write failed");
}

void write_snapshot(const std::string& path, const ConcentrationField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create snapshot '" + path + "'");
  write_snapshot(out, field);
}

ConcentrationField read_snapshot(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kSnapshotMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("snapshot: bad magic");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kSnapshotVersion) throw std::runtime_error("snapshot: unsupported version " + std::to_string(version));
  const auto nx = get<std::uint32_t>(in);
  const auto ny = get<std::uint32_t>(in);
  const auto nz = get<std::uint32_t>(in);
  double d[3], o[3];
  for (double& v : d) v = get<double>(in);
  for (double& v : o) v = get<double>(in);
  const double time = get<double>(in);
  const auto grid = GridSpec::from_extents(o[0], o[0] + (nx - 1) * d[0], o[1], o[1] + (ny - 1) * d[1], o[2],
                                           o[2] + (nz - 1) * d[2], d[0], d[1], d[2]);
  if (grid.nx() != nx || grid.ny() != ny || grid.nz() != nz) throw std::runtime_error("snapshot: inconsistent header");
  ConcentrationField field(grid, 0.0, time);
  in.read(reinterpret_cast<char*>(field.values().data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(field.values().size())));
  if (!in) throw std::runtime_error("snapshot: truncated data");
  return field;
}

ConcentrationField read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot '" + path + "'");
  return read_snapshot(in);
}

void write_slab_csv(std::ostream& out, const GridSpec& grid, const Eigen::ArrayXXd& slab) {
  if (slab.rows() != grid.nx() || slab.cols() != grid.ny()) throw std::invalid_argument("slab shape does not match grid");
  out << "x,y,concentration\n";
  for (Index i = 0; i < grid.nx(); ++i) {
    for (Index j = 0; j < grid.ny(); ++j) csv::write_row(out, {grid.x(i), grid.y(j), slab(i, j)});
  }
}

void write_slab_csv(const std::string& path, const GridSpec& grid, const Eigen::ArrayXXd& slab) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot create slab CSV '" + path + "'");
  write_slab_csv(out, grid, slab);
}

SlabTable read_slab_csv(std::istream& in) {
  const auto table = csv::read_table(in);
  const auto xc = table.column("x");
  const auto yc = table.column("y");
  const auto vc = table.column("concentration");
  std::map<double, Index> xs, ys;
  for (const auto& r : table.rows) {
    xs.emplace(r[xc], 0);
    ys.emplace(r[yc], 0);
  }
  if (xs.empty()) throw std::invalid_argument("slab CSV has no rows");
  SlabTable out;
  out.x.resize(static_cast<Index>(xs.size()));
  out.y.resize(static_cast<Index>(ys.size()));
  Index n = 0;
  for (auto& [v, idx] : xs) { idx = n; out.x[n++] = v; }
  n = 0;
  for (auto& [v, idx] : ys) { idx = n; out.y[n++] = v; }
  if (table.rows.size() != xs.size() * ys.size()) throw std::invalid_argument("slab CSV is not a full x-y lattice");
  out.values = Eigen::ArrayXXd::Constant(out.x.size(), out.y.size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : table.rows) out.values(xs.at(r[xc]), ys.at(r[yc])) = r[vc];
  if (out.values.isNaN().any()) throw std::invalid_argument("slab CSV has duplicate or missing cells");
  return out;
}

SlabTable read_slab_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open slab CSV '" + path + "'");
  return read_slab_csv(in);
}

}  // namespace hipv
