#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "llb/connection.hpp"
#include "llb/field.hpp"
#include "llb/grid.hpp"
#include "llb/solver.hpp"

namespace llb {

// Initial-data families selectable from a run file.
struct InitSpec {
  enum class Family { zero, constant, fourier_mode, random_bandlimited };
  Family family = Family::zero;
  Vec3 value;                // constant
  int axis = 1;              // fourier_mode fiber axis, 1..3
  std::vector<int> kappa;    // fourier_mode frequencies
  double amplitude = 1.0;    // fourier_mode / random_bandlimited
  int max_mode = 2;          // random_bandlimited
  std::uint64_t seed = 1;    // random_bandlimited
};

// Everything a run needs, parsed from a line-oriented "key = value" file.
// Unknown and duplicate keys are hard errors (with line numbers) so a typo
// cannot silently fall back to a default.
struct RunConfig {
  int dim = 0;
  std::vector<int> sizes;
  std::vector<double> lengths;  // defaults to 1.0 per axis
  MetricSpec metric;
  ConnectionSpec connection;
  InitSpec init;
  SolverConfig solver;
  std::string out_dir = "out";
  std::vector<std::string> checks;  // subset of the verify suite; default all

  GridPtr make_grid() const;
  BundleConnection make_connection(const GridPtr& grid) const;
  Section make_initial(const GridPtr& grid) const;

  // Canonical round-trippable form with every resolved key present.
  std::string serialize() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace llb
