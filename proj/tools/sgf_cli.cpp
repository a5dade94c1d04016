#include <CLI11.hpp>
#include <cstdio>
#include <algorithm>

#include "sgf/config.hpp"
#include "sgf/harness.hpp"

using namespace sgf;

namespace {

struct Common {
  std::string config_path;
  std::string out = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = -1;

  Config load() const {
    Config c = config_path.empty() ? Config{} : load_config(config_path);
    if (seed_set) c.seed = seed;
    if (threads >= 0) c.threads = threads;
    c.validate();
    return c;
  }
};

void add_common(CLI::App* app, Common& common) {
  app->add_option("-c,--config", common.config_path, "INI config file")->check(CLI::ExistingFile);
  app->add_option("-o,--out", common.out, "output directory");
  app->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) {
    common.seed = s;
    common.seed_set = true;
  }, "override galerkin.seed");
  app->add_option("--threads", common.threads, "worker threads (0: all cores)");
}

void print_checks(const ExperimentResult& r) {
  for (const auto& c : r.checks)
    std::printf("%-5s %-40s %.6g %s %.6g%s\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.value, c.relation.c_str(),
                c.threshold, c.asserted ? "" : " (reported)");
  for (const auto& w : r.warnings) std::printf("warning: %s\n", w.c_str());
}

int finish(ExperimentResult& r, const std::string& out) {
  print_checks(r);
  for (const auto& f : emit_results(r, out)) std::printf("wrote %s\n", f.c_str());
  std::printf("%s: %s\n", r.name.c_str(), r.passed() ? "passed" : "failed");
  return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic second-grade fluid experiments"};
  app.require_subcommand(1);
  Common common;

  auto* eig = app.add_subcommand("eig", "build and cache the Stokes eigenbasis");
  add_common(eig, common);
  std::string basis_file;
  eig->add_option("--save", basis_file, "also write the basis to this file");

  auto* check = app.add_subcommand("check", "invariant suite");
  add_common(check, common);
  bool sabotage = false;
  check->add_flag("--sabotage", sabotage, "use the plain convective trilinear form");

  std::vector<std::pair<std::string, CLI::App*>> experiments;
  for (const char* name : {"simulate", "sweep", "energy", "corrector", "additive"}) {
    auto* sub = app.add_subcommand(name, std::string(name) + " experiment");
    add_common(sub, common);
    experiments.emplace_back(name, sub);
  }

  auto* rerun = app.add_subcommand("rerun", "rerun an experiment from its manifest and compare outputs");
  std::string manifest;
  std::string rerun_out = "rerun";
  rerun->add_option("manifest", manifest, "manifest JSON")->required()->check(CLI::ExistingFile);
  rerun->add_option("-o,--out", rerun_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eig) {
      const Config c = common.load();
      const GridPtr g = make_grid(c.n, c.n);
      std::string id;
      const StokesEigenbasis st = cached_stokes_basis(g, c.stokes_modes, &id);
      if (!basis_file.empty()) save_basis(basis_file, st);
      std::printf("basis %s: %d modes on %dx%d\n", id.c_str(), st.size(), c.n, c.n);
      for (int i = 0; i < st.size(); ++i) std::printf("%d %.12g\n", i, st.eigenvalues[i]);
      return 0;
    }
    if (*check) {
      Config c = common.load();
      c.sabotage = c.sabotage || sabotage;
      ExperimentResult r = run_invariant_suite(c);
      return finish(r, common.out);
    }
    for (auto& [name, sub] : experiments)
      if (*sub) {
        ExperimentResult r = run_experiment(name, common.load());
        return finish(r, common.out);
      }
    if (*rerun) {
      const RunManifest before = parse_manifest(read_file(manifest));
      ExperimentResult r = rerun_from_manifest(manifest);
      print_checks(r);
      emit_results(r, rerun_out);
      int mismatches = 0;
      for (const auto& [file, sum] : before.outputs) {
        const auto it = std::find_if(r.manifest.outputs.begin(), r.manifest.outputs.end(),
                                     [&](const auto& o) { return o.first == file; });
        const bool same = it != r.manifest.outputs.end() && it->second == sum;
        mismatches += !same;
        std::printf("%-9s %s\n", same ? "identical" : "DIFFERS", file.c_str());
      }
      return mismatches == 0 ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
