#pragma once

#include <iosfwd>
#include <string>

#include "sgf/grid.hpp"

namespace sgf {

// Binary snapshot: "SGF1", nx, ny (u32 LE), bc tag byte, row-major f64 LE.
void write_snapshot(std::ostream& os, const ScalarField& f);
ScalarField read_snapshot(std::istream& is, GridPtr grid = nullptr);

void save_snapshot(const std::string& path, const ScalarField& f);
ScalarField load_snapshot(const std::string& path, GridPtr grid = nullptr);

// Little-endian primitives shared by the cache formats.
void put_u32(std::ostream& os, std::uint32_t v);
void put_f64(std::ostream& os, double v);
std::uint32_t get_u32(std::istream& is);
double get_f64(std::istream& is);

}  // namespace sgf
