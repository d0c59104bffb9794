#pragma once

#include <filesystem>
#include <span>

#include "gplab/gp.hpp"

namespace gplab {

/// Binary snapshot: 8-byte magic "GPLAB001", u32 dim, u32 points_per_axis,
/// f64 box_length, then little-endian complex64 (float re, float im) values in
/// row-major order.
inline constexpr char kSnapshotMagic[8] = {'G', 'P', 'L', 'A', 'B', '0', '0', '1'};

void write_snapshot(const std::filesystem::path& path, const GridSpec& grid,
                    std::span<const Complex> values);
void write_snapshot(const std::filesystem::path& path, const WaveFunction& phi);

struct Snapshot {
  GridSpec grid;
  Field values;  ///< element count is a power of grid.size() for kernel dumps
};

Snapshot read_snapshot(const std::filesystem::path& path);

/// CSV `index,x[,y,z],re,im` with 17 significant digits.
void write_snapshot_csv(const std::filesystem::path& path, const WaveFunction& phi);

}  // namespace gplab
