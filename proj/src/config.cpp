#include "sgf/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "sgf/table.hpp"

namespace sgf {

namespace {

namespace pt = boost::property_tree;

std::string show(int v) { return std::to_string(v); }
std::string show(std::uint64_t v) { return std::to_string(v); }
std::string show(double v) { return format_double(v); }
std::string show(bool v) { return v ? "true" : "false"; }
std::string show(const std::string& v) { return v; }
std::string show(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

void read(const std::string& key, const std::string& text, int& v) {
  std::size_t pos = 0;
  v = std::stoi(text, &pos);
  if (pos != text.size()) throw std::invalid_argument(key + ": not an integer: " + text);
}
void read(const std::string& key, const std::string& text, std::uint64_t& v) {
  std::size_t pos = 0;
  v = std::stoull(text, &pos);
  if (pos != text.size()) throw std::invalid_argument(key + ": not an unsigned integer: " + text);
}
void read(const std::string& key, const std::string& text, double& v) {
  std::size_t pos = 0;
  v = std::stod(text, &pos);
  if (pos != text.size()) throw std::invalid_argument(key + ": not a number: " + text);
}
void read(const std::string& key, const std::string& text, bool& v) {
  if (text == "true" || text == "1") v = true;
  else if (text == "false" || text == "0") v = false;
  else throw std::invalid_argument(key + ": not a boolean: " + text);
}
void read(const std::string&, const std::string& text, std::string& v) { v = text; }
void read(const std::string& key, const std::string& text, std::vector<double>& v) {
  v.clear();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t"), b = item.find_last_not_of(" \t");
    if (a == std::string::npos) continue;
    double x = 0.0;
    read(key, item.substr(a, b - a + 1), x);
    v.push_back(x);
  }
}

template <class C, class F>
void visit(C& c, F&& f) {
  f("grid.n", c.n);
  f("grid.stokes_modes", c.stokes_modes);
  f("noise.kind", c.noise_kind);
  f("noise.K", c.K);
  f("noise.seed", c.noise_seed);
  f("galerkin.alpha", c.alpha);
  f("galerkin.nu", c.nu);
  f("galerkin.nu_tilde", c.nu_tilde);
  f("galerkin.N", c.N);
  f("galerkin.dt", c.dt);
  f("galerkin.T", c.T);
  f("galerkin.scheme", c.scheme);
  f("galerkin.save_stride", c.save_stride);
  f("galerkin.seed", c.seed);
  f("galerkin.path", c.path);
  f("euler.dt", c.euler_dt);
  f("euler.T", c.euler_T);
  f("euler.cell_amplitude", c.cell_amplitude);
  f("euler.pair_amplitude", c.pair_amplitude);
  f("euler.pair_radius", c.pair_radius);
  f("euler.pair_offset", c.pair_offset);
  f("euler.pair_height", c.pair_height);
  f("sweep.alphas", c.alphas);
  f("sweep.c_nu", c.c_nu);
  f("sweep.c_nu_tilde", c.c_nu_tilde);
  f("sweep.paths", c.paths);
  f("sweep.coupling", c.coupling);
  f("sweep.width_factor", c.width_factor);
  f("sweep.initial_grid", c.initial_grid);
  f("sweep.threads", c.threads);
  f("energy.paths", c.energy_paths);
  f("energy.remainder_states", c.remainder_states);
  f("energy.remainder_N", c.remainder_N);
  f("corrector.grid", c.corrector_grid);
  f("corrector.deltas", c.deltas);
  f("additive.N", c.additive_N);
  f("additive.dt", c.additive_dt);
  f("additive.T", c.additive_T);
  f("additive.amplitude", c.additive_amplitude);
  f("additive.noise", c.additive_noise);
  f("additive.law_paths", c.law_paths);
  f("additive.refined_grid", c.refined_grid);
  f("check.sabotage", c.sabotage);
}

}  // namespace

ReferenceFlow Config::reference() const {
  ReferenceFlow f;
  f.cell_amplitude = cell_amplitude;
  f.pair_amplitude = pair_amplitude;
  f.pair_radius = pair_radius;
  f.pair_offset = pair_offset;
  f.pair_height = pair_height;
  return f;
}

SimConfig Config::sim() const {
  SimConfig s;
  s.alpha = alpha;
  s.nu = nu;
  s.nu_tilde = nu_tilde;
  s.N = N;
  s.dt = dt;
  s.T = T;
  s.scheme = scheme_from_string(scheme);
  s.seed = seed;
  s.save_stride = save_stride;
  return s;
}

void Config::validate() const {
  if (n < 9 || stokes_modes < 1) throw std::invalid_argument("grid.n must be >= 9 and grid.stokes_modes >= 1");
  if (N < 1 || N > stokes_modes - 4) throw std::invalid_argument("galerkin.N must lie in [1, stokes_modes - 4]");
  if (additive_N < 1 || additive_N > stokes_modes - 4) throw std::invalid_argument("additive.N must lie in [1, stokes_modes - 4]");
  if (K < 0) throw std::invalid_argument("noise.K must be nonnegative");
  noise_kind_from_string(noise_kind);
  noise_kind_from_string(additive_noise);
  scheme_from_string(scheme);
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0)) throw std::invalid_argument("sweep.alphas must be positive");
    if (i > 0 && !(alphas[i] < alphas[i - 1])) throw std::invalid_argument("sweep.alphas must be strictly decreasing");
  }
  if (paths < 1 || energy_paths < 1 || law_paths < 1) throw std::invalid_argument("path counts must be >= 1");
  if (coupling != "shared_paths" && coupling != "independent")
    throw std::invalid_argument("sweep.coupling must be shared_paths or independent");
  if (threads < 0) throw std::invalid_argument("sweep.threads must be >= 0");
  sim().validate(N);
}

std::vector<std::pair<std::string, std::string>> config_entries(const Config& c) {
  std::vector<std::pair<std::string, std::string>> out;
  visit(c, [&](const char* key, const auto& v) { out.emplace_back(key, show(v)); });
  return out;
}

Config config_from_entries(const std::map<std::string, std::string>& entries) {
  Config c;
  std::size_t used = 0;
  visit(c, [&](const char* key, auto& v) {
    auto it = entries.find(key);
    if (it == entries.end()) return;
    read(key, it->second, v);
    ++used;
  });
  if (used != entries.size()) {
    std::map<std::string, std::string> known;
    visit(c, [&](const char* key, auto&) { known[key]; });
    for (const auto& [k, v] : entries)
      if (!known.count(k)) throw std::invalid_argument("unknown config key: " + k);
  }
  c.validate();
  return c;
}

Config parse_config(const std::string& ini_text) {
  pt::ptree tree;
  std::istringstream is(ini_text);
  pt::read_ini(is, tree);
  std::map<std::string, std::string> entries;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw std::invalid_argument("config key outside a section: " + section);
    for (const auto& [key, value] : body) entries[section + "." + key] = value.get_value<std::string>();
  }
  return config_from_entries(entries);
}

Config load_config(const std::string& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::runtime_error("cannot read config " + path + ": " + e.message());
  }
  std::ostringstream os;
  pt::write_ini(os, tree);
  return parse_config(os.str());
}

std::string to_ini(const Config& c) {
  std::ostringstream os;
  std::string current;
  for (const auto& [key, value] : config_entries(c)) {
    const auto dot = key.find('.');
    const std::string section = key.substr(0, dot);
    if (section != current) {
      os << (current.empty() ? "" : "\n") << '[' << section << "]\n";
      current = section;
    }
    os << key.substr(dot + 1) << " = " << value << '\n';
  }
  return os.str();
}

std::string cache_dir() {
  const char* d = std::getenv("SGF_CACHE_DIR");
  return d ? std::string(d) : std::string();
}

}  // namespace sgf
