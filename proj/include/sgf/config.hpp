#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sgf/euler.hpp"
#include "sgf/galerkin.hpp"

namespace sgf {

// Every tunable of every experiment. The INI layout is "[section] key = value"; keys missing from
// a file keep these defaults.
struct Config {
  // [grid]
  int n = 65;
  int stokes_modes = 48;
  // [noise]
  std::string noise_kind = "bumps";
  int K = 4;
  std::uint64_t noise_seed = 7;
  // [galerkin]
  double alpha = 0.1;
  double nu = 0.01;
  double nu_tilde = 0.01;
  int N = 16;
  double dt = 1e-3;
  double T = 0.5;
  std::string scheme = "midpoint_strat";
  int save_stride = 10;
  std::uint64_t seed = 1;
  std::uint64_t path = 0;
  // [euler]
  double euler_dt = 1e-3;
  double euler_T = 1.0;
  double cell_amplitude = 1.0;
  double pair_amplitude = 0.4;
  double pair_radius = 0.3;
  double pair_offset = 0.2;
  double pair_height = 0.4;
  // [sweep]
  std::vector<double> alphas{0.2, 0.1, 0.05, 0.025};
  double c_nu = 1.0;
  double c_nu_tilde = 1.0;
  int paths = 32;
  std::string coupling = "shared_paths";
  double width_factor = 2.0;
  int initial_grid = 1025;
  int threads = 0;  // 0: hardware concurrency
  // [energy]
  int energy_paths = 8;
  int remainder_states = 20;
  std::vector<double> remainder_N{8, 12, 16, 20, 24};
  // [corrector]
  int corrector_grid = 129;
  std::vector<double> deltas{0.05, 0.1, 0.2, 0.4};
  // [additive]
  int additive_N = 24;
  double additive_dt = 5e-4;
  double additive_T = 0.1;
  double additive_amplitude = 0.1;
  std::string additive_noise = "eigen";
  int law_paths = 64;
  int refined_grid = 129;
  // [check]
  bool sabotage = false;

  ReferenceFlow reference() const;
  SimConfig sim() const;
  void validate() const;
};

Config load_config(const std::string& path);
Config parse_config(const std::string& ini_text);
std::string to_ini(const Config& c);
// Flat "section.key" -> value text, in a fixed order; used to echo the config into manifests.
std::vector<std::pair<std::string, std::string>> config_entries(const Config& c);
Config config_from_entries(const std::map<std::string, std::string>& entries);

// Directory for basis caches (SGF_CACHE_DIR), empty when unset.
std::string cache_dir();

}  // namespace sgf
