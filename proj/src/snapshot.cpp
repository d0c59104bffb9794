#include "gplab/snapshot.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "gplab/errors.hpp"

namespace gplab {
namespace {

template <class T>
void put_le(std::vector<char>& buf, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.insert(buf.end(), bytes, bytes + sizeof(T));
}

template <class T>
T get_le(const char* p) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

constexpr std::size_t kHeaderBytes = 8 + 4 + 4 + 8;

}  // namespace

void write_snapshot(const std::filesystem::path& path, const GridSpec& grid,
                    std::span<const Complex> values) {
  std::vector<char> buf(kSnapshotMagic, kSnapshotMagic + 8);
  buf.reserve(kHeaderBytes + values.size() * 8);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(grid.dim));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(grid.points));
  put_le<double>(buf, grid.box_length);
  for (const Complex& z : values) {
    put_le<float>(buf, static_cast<float>(z.real()));
    put_le<float>(buf, static_cast<float>(z.imag()));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("snapshot: cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw ConfigError("snapshot: write failed for " + path.string());
}

void write_snapshot(const std::filesystem::path& path, const WaveFunction& phi) {
  write_snapshot(path, phi.grid, std::span<const Complex>(phi.values.data(), static_cast<std::size_t>(phi.values.size())));
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("snapshot: cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < kHeaderBytes || std::memcmp(buf.data(), kSnapshotMagic, 8) != 0) {
    throw ConfigError("snapshot: bad magic in " + path.string());
  }
  if ((buf.size() - kHeaderBytes) % 8 != 0) throw ConfigError("snapshot: truncated payload");
  Snapshot s;
  s.grid.dim = static_cast<int>(get_le<std::uint32_t>(buf.data() + 8));
  s.grid.points = static_cast<int>(get_le<std::uint32_t>(buf.data() + 12));
  s.grid.box_length = get_le<double>(buf.data() + 16);
  validate(s.grid);
  const std::size_t count = (buf.size() - kHeaderBytes) / 8;
  s.values.resize(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    const char* p = buf.data() + kHeaderBytes + 8 * i;
    s.values(static_cast<Eigen::Index>(i)) = Complex(get_le<float>(p), get_le<float>(p + 4));
  }
  return s;
}

void write_snapshot_csv(const std::filesystem::path& path, const WaveFunction& phi) {
  std::ofstream out(path);
  if (!out) throw ConfigError("snapshot: cannot open " + path.string() + " for writing");
  static constexpr const char* kAxes[] = {"x", "y", "z"};
  out << "index";
  for (int a = 0; a < phi.grid.dim; ++a) out << ',' << kAxes[a];
  out << ",re,im\n";
  for (std::size_t i = 0; i < phi.grid.size(); ++i) {
    const auto x = phi.grid.position(i);
    out << i;
    for (int a = 0; a < phi.grid.dim; ++a) out << ',' << fmt::format("{:.17g}", x[static_cast<std::size_t>(a)]);
    const Complex z = phi.values(static_cast<Eigen::Index>(i));
    out << ',' << fmt::format("{:.17g}", z.real()) << ',' << fmt::format("{:.17g}", z.imag()) << '\n';
  }
}

}  // namespace gplab
