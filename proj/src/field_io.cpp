#include "sgf/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace sgf {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double v) {
  const auto u = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated snapshot");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("truncated snapshot");
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
  return std::bit_cast<double>(u);
}

void write_snapshot(std::ostream& os, const ScalarField& f) {
  os.write("SGF1", 4);
  put_u32(os, static_cast<std::uint32_t>(f.grid->nx));
  put_u32(os, static_cast<std::uint32_t>(f.grid->ny));
  const char tag = static_cast<char>(f.tag);
  os.write(&tag, 1);
  for (int k = 0; k < f.values.size(); ++k) put_f64(os, f.values[k]);
}

ScalarField read_snapshot(std::istream& is, GridPtr grid) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "SGF1", 4) != 0)
    throw std::runtime_error("not an SGF1 snapshot");
  const int nx = static_cast<int>(get_u32(is));
  const int ny = static_cast<int>(get_u32(is));
  char tag;
  if (!is.read(&tag, 1) || tag < 0 || tag > 2) throw std::runtime_error("bad boundary tag");
  if (!grid) grid = make_grid(nx, ny);
  if (grid->nx != nx || grid->ny != ny) throw std::runtime_error("snapshot grid mismatch");
  ScalarField f(grid, static_cast<BcTag>(tag));
  for (int k = 0; k < f.values.size(); ++k) f.values[k] = get_f64(is);
  return f;
}

void save_snapshot(const std::string& path, const ScalarField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_snapshot(os, f);
  if (!os) throw std::runtime_error("write failed: " + path);
}

ScalarField load_snapshot(const std::string& path, GridPtr grid) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return read_snapshot(is, std::move(grid));
}

}  // namespace sgf
