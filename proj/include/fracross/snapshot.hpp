#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fracross/grid.hpp"

namespace fracross {

inline constexpr std::uint32_t kSnapshotVersion = 1;

/// Fields of all species at one time, as stored in an FXD1 file.
struct Snapshot {
  double t = 0.0;
  std::vector<ScalarField> fields;
};

/// Header "FXD1", u32 version, u32 d, u32 n, u32 dims[d], f64 L, f64 t, then n
/// row-major float64 arrays, all little-endian.
std::string encode_snapshot(const Snapshot& snapshot);
Snapshot decode_snapshot(const std::string& bytes);

/// Throws SnapshotError on I/O failure or a malformed file.
void write_snapshot(const std::filesystem::path& path, const Snapshot& snapshot);
Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace fracross
