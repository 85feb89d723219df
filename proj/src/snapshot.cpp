#include "llb/snapshot.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace llb {

namespace {

constexpr char kMagic[8] = {'L', 'L', 'B', 'S', 'N', 'A', 'P', '1'};

const std::uint32_t* crc_table() {
  static const auto table = [] {
    static std::uint32_t t[256];
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  return table;
}

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& buf, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

std::uint32_t crc32(const unsigned char* data, std::size_t n) {
  const std::uint32_t* t = crc_table();
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i) c = t[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

void write_snapshot(const std::string& path, const Section& v, double time) {
  if (v.rank != 0 || v.fiber != 3)
    throw std::runtime_error("write_snapshot: only rank-0 fiber-3 sections are stored");
  const auto& grid = *v.grid;
  std::vector<unsigned char> payload;
  payload.reserve(4 + 4 * grid.m + 8 + v.values.size() * 8);
  put_u32(payload, static_cast<std::uint32_t>(grid.m));
  for (int s : grid.sizes) put_u32(payload, static_cast<std::uint32_t>(s));
  put_f64(payload, time);
  for (double x : v.values) put_f64(payload, x);
  const std::uint32_t crc = crc32(payload.data(), payload.size());

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("write_snapshot: cannot open " + path);
  os.write(kMagic, 8);
  os.write(reinterpret_cast<const char*>(payload.data()),
           static_cast<std::streamsize>(payload.size()));
  std::vector<unsigned char> tail;
  put_u32(tail, crc);
  os.write(reinterpret_cast<const char*>(tail.data()), 4);
  if (!os) throw std::runtime_error("write_snapshot: write failed for " + path);
}

SnapshotData read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_snapshot: cannot open " + path);
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(is)),
                                 std::istreambuf_iterator<char>());
  if (raw.size() < 12 || std::memcmp(raw.data(), kMagic, 8) != 0)
    throw std::runtime_error("read_snapshot: bad magic in " + path);
  const std::uint32_t dim = get_u32(raw.data() + 8);
  if (dim < 1 || dim > 8)
    throw std::runtime_error("read_snapshot: implausible dimension " + std::to_string(dim));
  std::size_t expected = 8 + 4 + 4 * static_cast<std::size_t>(dim) + 8 + 4;
  if (raw.size() < expected)
    throw std::runtime_error("read_snapshot: truncated header in " + path);
  SnapshotData snap;
  std::size_t n_nodes = 1;
  for (std::uint32_t i = 0; i < dim; ++i) {
    const std::uint32_t s = get_u32(raw.data() + 12 + 4 * i);
    snap.sizes.push_back(static_cast<int>(s));
    n_nodes *= s;
  }
  expected += 24 * n_nodes;
  if (raw.size() != expected)
    throw std::runtime_error("read_snapshot: " + path + " has " +
                             std::to_string(raw.size()) + " bytes, expected " +
                             std::to_string(expected));
  const std::size_t payload_len = raw.size() - 12;
  const std::uint32_t stored = get_u32(raw.data() + raw.size() - 4);
  const std::uint32_t actual = crc32(raw.data() + 8, payload_len);
  if (stored != actual)
    throw std::runtime_error("read_snapshot: checksum mismatch in " + path);
  const unsigned char* p = raw.data() + 12 + 4 * dim;
  snap.time = get_f64(p);
  p += 8;
  snap.values.resize(3 * n_nodes);
  for (std::size_t i = 0; i < snap.values.size(); ++i, p += 8) snap.values[i] = get_f64(p);
  return snap;
}

Section read_snapshot_section(const std::string& path, GridPtr grid, double* time_out) {
  SnapshotData snap = read_snapshot(path);
  if (snap.sizes != grid->sizes)
    throw std::runtime_error("read_snapshot: grid sizes do not match " + path);
  Section v(grid, 0, 3);
  v.values = std::move(snap.values);
  if (time_out) *time_out = snap.time;
  return v;
}

}  // namespace llb
