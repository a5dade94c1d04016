#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sgf/config.hpp"
#include "sgf/harness.hpp"
#include "sgf/stokes.hpp"

namespace py = pybind11;

namespace {

sgf::Config config_from(const std::string& ini, const std::map<std::string, std::string>& overrides) {
  sgf::Config c = ini.empty() ? sgf::Config{} : sgf::parse_config(ini);
  if (overrides.empty()) return c;
  std::map<std::string, std::string> entries;
  for (const auto& [k, v] : sgf::config_entries(c)) entries[k] = v;
  for (const auto& [k, v] : overrides) {
    if (!entries.count(k)) throw std::invalid_argument("unknown config key: " + k);
    entries[k] = v;
  }
  return sgf::config_from_entries(entries);
}

py::dict to_dict(const sgf::ExperimentResult& r) {
  py::dict checks;
  for (const auto& c : r.checks) {
    py::dict d;
    d["value"] = c.value;
    d["relation"] = c.relation;
    d["threshold"] = c.threshold;
    d["pass"] = c.pass;
    d["asserted"] = c.asserted;
    checks[py::str(c.name)] = d;
  }
  py::dict tables;
  for (const auto& [name, t] : r.tables) {
    py::dict cols;
    for (const auto& c : t.columns) cols[py::str(c)] = t.col(c);
    tables[py::str(name)] = cols;
  }
  py::dict out;
  out["name"] = r.name;
  out["passed"] = r.passed();
  out["checks"] = checks;
  out["tables"] = tables;
  out["warnings"] = r.warnings;
  out["report_json"] = r.report_json();
  out["manifest_json"] = sgf::manifest_json(r.manifest);
  return out;
}

}  // namespace

PYBIND11_MODULE(_sgf, m) {
  m.doc() = "Stochastic second-grade fluid experiments";
  m.def("code_version", &sgf::code_version);
  m.def("default_config", [] { return sgf::to_ini(sgf::Config{}); }, "Default configuration as INI text.");
  m.def(
      "run_experiment",
      [](const std::string& name, const std::string& ini, const std::map<std::string, std::string>& overrides) {
        const sgf::Config c = config_from(ini, overrides);
        sgf::ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = sgf::run_experiment(name, c);
        }
        return to_dict(r);
      },
      py::arg("name"), py::arg("config") = "", py::arg("overrides") = std::map<std::string, std::string>{},
      "Runs check, simulate, sweep, energy, corrector or additive. Overrides use 'section.key' names.");
  m.def(
      "stokes_eigenvalues",
      [](int n, int modes) {
        py::gil_scoped_release release;
        return sgf::stokes_eigensolve(sgf::make_grid(n, n), modes).eigenvalues;
      },
      py::arg("n"), py::arg("modes"), "Lowest Stokes eigenvalues on the unit square with an n x n grid.");
}
