#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sgf/config.hpp"
#include "sgf/table.hpp"

namespace sgf {

enum class Coupling { shared_paths, independent };
std::string to_string(Coupling c);
Coupling coupling_from_string(const std::string& s);

struct SweepConfig {
  std::vector<double> alphas;
  double c_nu = 1.0;
  double c_nu_tilde = 1.0;
  int paths = 32;
  Coupling coupling = Coupling::shared_paths;
  int n = 65;
  int stokes_modes = 48;
  int N = 16;
  int K = 4;
  NoiseKind noise_kind = NoiseKind::bumps;
  std::uint64_t noise_seed = 7;
  double T = 0.5;
  double dt = 1e-3;
  int save_stride = 10;
  Scheme scheme = Scheme::midpoint_strat;
  std::uint64_t seed = 1;
  double width_factor = 2.0;
  double euler_dt = 1e-3;
  ReferenceFlow flow;
  int threads = 0;

  static SweepConfig from(const Config& c);
  void validate() const;
};

// One measured quantity with its gate. Informational entries are reported but never fail a run.
struct Check {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<=", ">=", "==", "true"
  double threshold = 0.0;
  bool pass = false;
  bool asserted = true;
};

struct RunManifest {
  std::string experiment;
  std::string code_version;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::vector<double> alphas;
  std::vector<int> paths_used;  // per alpha, after blow-up exclusions
  std::vector<int> blow_ups;
  std::vector<std::pair<std::string, std::string>> outputs;  // file name -> FNV-1a 64 checksum
};

std::string manifest_json(const RunManifest& m);
RunManifest parse_manifest(const std::string& json);

struct ExperimentResult {
  std::string name;
  std::vector<std::pair<std::string, ResultTable>> tables;
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  RunManifest manifest;

  bool passed() const;
  const Check& check(const std::string& name) const;
  const ResultTable& table(const std::string& name) const;
  std::string report_json() const;
};

const char* code_version();

ExperimentResult run_invariant_suite(const Config& cfg);
ExperimentResult run_inviscid_sweep(const Config& cfg);
ExperimentResult run_energy_experiment(const Config& cfg);
ExperimentResult run_corrector_diagnostics(const Config& cfg);
ExperimentResult run_additive_experiment(const Config& cfg);
// One Galerkin path from the initial family at galerkin.alpha.
ExperimentResult run_single_path(const Config& cfg);
// Names: check, simulate, sweep, energy, corrector, additive.
ExperimentResult run_experiment(const std::string& name, const Config& cfg);

// Writes <name>_<table>.csv, <name>_report.json and <name>_manifest.json into dir and fills the
// manifest's output index. Returns the written paths.
std::vector<std::string> emit_results(ExperimentResult& result, const std::string& dir);

// Re-executes the experiment recorded in a manifest file.
ExperimentResult rerun_from_manifest(const std::string& manifest_path);

std::string fnv1a_hex(const std::string& bytes);
std::string read_file(const std::string& path);

// Runs fn(i) for i in [0, count) on a worker pool; threads = 0 uses the hardware concurrency.
// Work is claimed dynamically, so callers must write results into per-index slots.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace sgf
