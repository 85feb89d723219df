#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"
#include "llb/config.hpp"
#include "llb/snapshot.hpp"

using namespace llb;
using namespace llbtest;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "llb_io_test";
  fs::create_directories(dir);
  return dir;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void dump(const fs::path& p, const std::vector<char>& bytes) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

constexpr const char* kMinimal =
    "grid.dim = 2\n"
    "grid.sizes = 16\n"
    "solver.t_end = 0.1\n";

}  // namespace

TEST_CASE("minimal config resolves documented defaults") {
  const RunConfig cfg = parse_config(kMinimal);
  CHECK(cfg.dim == 2);
  REQUIRE(cfg.sizes.size() == 2);  // single value broadcasts to every axis
  CHECK(cfg.sizes[0] == 16);
  CHECK(cfg.sizes[1] == 16);
  CHECK(cfg.lengths == std::vector<double>{1.0, 1.0});
  CHECK(cfg.metric.is_flat());
  CHECK(cfg.connection.family == ConnectionSpec::Family::trivial);
  CHECK(cfg.init.family == InitSpec::Family::zero);
  CHECK(cfg.out_dir == "out");
  REQUIRE(cfg.checks.size() == 1);
  CHECK(cfg.checks[0] == "all");
  CHECK(cfg.solver.lambda == 1.0);
  CHECK(cfg.solver.mu == 1.0);
  CHECK(cfg.solver.dt == 0.0);
  CHECK(cfg.solver.t_end == 0.1);

  auto grid = cfg.make_grid();
  CHECK(grid->n_nodes == 256);
  CHECK(cfg.make_initial(grid).max_abs() == 0.0);
}

TEST_CASE("config parsing rejects malformed and unknown input") {
  CHECK_THROWS_WITH_AS(parse_config("grid.dim = 2\ngrid.sizes = 16\n"),
                       doctest::Contains("solver.t_end is required"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config("grid.sizes = 16\nsolver.t_end = 1\n"),
                       doctest::Contains("grid.dim is required"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config("grid.dim = 4\ngrid.sizes = 16\nsolver.t_end = 1\n"),
                       doctest::Contains("grid.dim must be 2 or 3"), std::runtime_error);

  const std::string unknown = std::string(kMinimal) + "grid.spacing = 0.5\n";
  CHECK_THROWS_WITH_AS(parse_config(unknown), doctest::Contains("line 4: unknown key 'grid.spacing'"),
                       std::runtime_error);

  const std::string dup = std::string(kMinimal) + "grid.dim = 3\n";
  CHECK_THROWS_WITH_AS(parse_config(dup), doctest::Contains("duplicate key 'grid.dim'"),
                       std::runtime_error);

  CHECK_THROWS_WITH_AS(parse_config(std::string(kMinimal) + "solver.lambda = -1\n"),
                       doctest::Contains("solver.lambda > 0"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config(std::string(kMinimal) + "solver.dt = 0\n"),
                       doctest::Contains("solver.dt must be positive"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config(std::string(kMinimal) + "init.axis = 4\n"),
                       doctest::Contains("init.axis must be 1, 2 or 3"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config(std::string(kMinimal) + "metric.family = spherical\n"),
                       doctest::Contains("metric.family must be flat or conformal"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config("grid.dim\n"), doctest::Contains("expected 'key = value'"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config("= 3\n"), doctest::Contains("empty key"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config("grid.dim =\n"),
                       doctest::Contains("empty value for 'grid.dim'"), std::runtime_error);
}

TEST_CASE("comments, blank lines, and per-axis values parse") {
  const RunConfig cfg = parse_config(
      "# full run\n"
      "grid.dim = 2\n"
      "\n"
      "grid.sizes = 16 32   # per-axis\n"
      "grid.lengths = 1.0 2.0\n"
      "metric.family = conformal\n"
      "metric.amplitude = 0.15\n"
      "metric.kappa = 1\n"
      "connection.family = curved\n"
      "connection.axes = 3 1\n"
      "connection.theta = 0.4 0.3\n"
      "connection.kappa = 1\n"
      "init.family = random_bandlimited\n"
      "init.max_mode = 2\n"
      "init.seed = 7\n"
      "init.amplitude = 1.0\n"
      "solver.scheme = rk4\n"
      "solver.dt = 1e-4\n"
      "solver.t_end = 0.1\n"
      "output.checks = energy max_principle\n");
  CHECK(cfg.sizes == std::vector<int>{16, 32});
  CHECK(cfg.lengths == std::vector<double>{1.0, 2.0});
  CHECK(cfg.metric.family == MetricSpec::Family::conformal);
  CHECK(cfg.metric.kappa == std::vector<int>{1, 1});
  CHECK(cfg.connection.axes == std::vector<int>{3, 1});
  CHECK(cfg.init.seed == 7);
  CHECK(cfg.checks == std::vector<std::string>{"energy", "max_principle"});
}

TEST_CASE("serialization is a parser fixpoint") {
  const RunConfig cfg = parse_config(
      "grid.dim = 2\n"
      "grid.sizes = 24 16\n"
      "grid.lengths = 6.283185307179586 1.0\n"
      "metric.family = conformal\n"
      "metric.amplitude = 0.2\n"
      "metric.kappa = 1 2\n"
      "connection.family = constant_skew\n"
      "connection.axes = 3 1\n"
      "connection.theta = 0.4 0.25\n"
      "init.family = fourier_mode\n"
      "init.axis = 2\n"
      "init.kappa = 1 0\n"
      "init.amplitude = 0.5\n"
      "solver.scheme = imex\n"
      "solver.t_end = 0.25\n"
      "solver.cg_tol = 1e-11\n"
      "output.dir = scratch_run\n"
      "output.checks = energy\n");
  const std::string once = cfg.serialize();
  const RunConfig reparsed = parse_config(once);
  CHECK(reparsed.serialize() == once);
  CHECK(reparsed.sizes == cfg.sizes);
  CHECK(reparsed.solver.scheme == SolverConfig::Scheme::imex);
  CHECK(reparsed.init.axis == 2);
  CHECK(reparsed.out_dir == "scratch_run");
}

TEST_CASE("snapshots round-trip bitwise") {
  auto g = flat_grid(8);
  const Section v = make_random_bandlimited(g, 2, 99, 1.0);
  const fs::path path = scratch_dir() / "roundtrip.bin";
  write_snapshot(path.string(), v, 0.375);

  // Total size is fixed by the header: magic + dim + sizes + time + payload + crc.
  CHECK(fs::file_size(path) == 8 + 4 + 4 * 2 + 8 + 24 * 64 + 4);

  const SnapshotData data = read_snapshot(path.string());
  CHECK(data.time == 0.375);
  CHECK(data.sizes == std::vector<int>{8, 8});
  REQUIRE(data.values.size() == v.values.size());
  CHECK(data.values == v.values);

  double t = 0.0;
  const Section back = read_snapshot_section(path.string(), g, &t);
  CHECK(t == 0.375);
  CHECK(back.values == v.values);

  auto g16 = flat_grid(16);
  CHECK_THROWS_WITH_AS(read_snapshot_section(path.string(), g16, nullptr),
                       doctest::Contains("grid sizes do not match"), std::runtime_error);
}

TEST_CASE("snapshot reader rejects damaged files") {
  auto g = flat_grid(8);
  const Section v = make_random_bandlimited(g, 2, 100, 1.0);
  const fs::path good = scratch_dir() / "good.bin";
  write_snapshot(good.string(), v, 1.0);
  const std::vector<char> bytes = slurp(good);

  const fs::path truncated = scratch_dir() / "truncated.bin";
  dump(truncated, std::vector<char>(bytes.begin(), bytes.end() - 10));
  CHECK_THROWS_WITH_AS(read_snapshot(truncated.string()), doctest::Contains("expected"),
                       std::runtime_error);

  std::vector<char> corrupt = bytes;
  corrupt[100] = static_cast<char>(corrupt[100] ^ 0x40);  // flip a payload bit
  const fs::path bad = scratch_dir() / "corrupt.bin";
  dump(bad, corrupt);
  CHECK_THROWS_WITH_AS(read_snapshot(bad.string()), doctest::Contains("checksum mismatch"),
                       std::runtime_error);

  std::vector<char> magic = bytes;
  magic[0] = 'X';
  const fs::path wrong = scratch_dir() / "magic.bin";
  dump(wrong, magic);
  CHECK_THROWS_WITH_AS(read_snapshot(wrong.string()), doctest::Contains("bad magic"),
                       std::runtime_error);

  CHECK_THROWS_WITH_AS(read_snapshot((scratch_dir() / "missing.bin").string()),
                       doctest::Contains("cannot open"), std::runtime_error);
}

TEST_CASE("checksum matches the reference implementation on a known vector") {
  // CRC-32 of "123456789" is the classic 0xCBF43926.
  const unsigned char msg[] = {'1', '2', '3', '4', '5', '6', '7', '8', '9'};
  CHECK(crc32(msg, 9) == 0xCBF43926u);
  CHECK(crc32(msg, 0) == 0x00000000u);
}
