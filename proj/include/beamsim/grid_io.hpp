#pragma once

#include <string>
#include <vector>

#include "beamsim/complex_field.hpp"

namespace beamsim {

// Binary grid dump format, used for snapshots and regression fixtures.
// Layout: 16-byte magic (identifies payload type and version), then
// little-endian u32 nx, u32 ny, f64 extent, then row-major f64 samples;
// complex fields interleave re,im per sample.

struct RealGrid {
  int nx = 0, ny = 0;
  double extent = 0.0;
  std::vector<double> values;
};

void write_field(const std::string& path, const ComplexField& f);
ComplexField read_field(const std::string& path);

void write_real_grid(const std::string& path, const RealGrid& g);
RealGrid read_real_grid(const std::string& path);

}  // namespace beamsim
