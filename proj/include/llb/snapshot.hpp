#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "llb/field.hpp"

namespace llb {

// Binary state snapshot, little-endian:
//   magic   8 bytes  "LLBSNAP1"
//   dim     u32
//   sizes   u32 * dim
//   time    f64
//   values  f64 * 3 * prod(sizes), node-major (row-major nodes, 3 components)
//   crc     u32, CRC-32 over everything between magic and crc
// Total byte length is fully determined by the header, so truncation is
// detectable before the checksum.
struct SnapshotData {
  std::vector<int> sizes;
  double time = 0.0;
  std::vector<double> values;  // 3 per node
};

// Reflected CRC-32 (polynomial 0xEDB88320), init and final xor 0xFFFFFFFF.
std::uint32_t crc32(const unsigned char* data, std::size_t n);

void write_snapshot(const std::string& path, const Section& v, double time);

SnapshotData read_snapshot(const std::string& path);

// Reads and validates the sizes against the grid, returning a ready section.
Section read_snapshot_section(const std::string& path, GridPtr grid, double* time_out = nullptr);

}  // namespace llb
