#include "beamsim/grid_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace beamsim {
namespace {

constexpr char kFieldMagic[16] = {'B', 'S', 'I', 'M', 'G', 'R', 'I', 'D',
                                  'C', 'P', 'L', 'X', '0', '0', '0', '1'};
constexpr char kRealMagic[16] = {'B', 'S', 'I', 'M', 'G', 'R', 'I', 'D',
                                 'R', 'E', 'A', 'L', '0', '0', '0', '1'};

// All supported targets are little-endian; values are written verbatim.
template <typename T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

void open_and_check(std::ifstream& is, const std::string& path, const char* magic) {
  is.open(path, std::ios::binary);
  if (!is) throw std::runtime_error("grid_io: cannot open " + path);
  char head[16];
  is.read(head, 16);
  if (!is || std::memcmp(head, magic, 16) != 0)
    throw std::runtime_error("grid_io: bad magic in " + path);
}

}  // namespace

void write_field(const std::string& path, const ComplexField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("grid_io: cannot write " + path);
  os.write(kFieldMagic, 16);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.nx()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.ny()));
  put<double>(os, f.extent());
  for (const auto& v : f.samples()) {
    put<double>(os, v.real());
    put<double>(os, v.imag());
  }
}

ComplexField read_field(const std::string& path) {
  std::ifstream is;
  open_and_check(is, path, kFieldMagic);
  const auto nx = get<std::uint32_t>(is);
  const auto ny = get<std::uint32_t>(is);
  const auto extent = get<double>(is);
  ComplexField f(static_cast<int>(nx), static_cast<int>(ny), extent);
  for (auto& v : f.samples()) {
    const double re = get<double>(is);
    const double im = get<double>(is);
    v = {re, im};
  }
  if (!is) throw std::runtime_error("grid_io: truncated field in " + path);
  return f;
}

void write_real_grid(const std::string& path, const RealGrid& g) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("grid_io: cannot write " + path);
  os.write(kRealMagic, 16);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.nx));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.ny));
  put<double>(os, g.extent);
  for (double v : g.values) put<double>(os, v);
}

RealGrid read_real_grid(const std::string& path) {
  std::ifstream is;
  open_and_check(is, path, kRealMagic);
  RealGrid g;
  g.nx = static_cast<int>(get<std::uint32_t>(is));
  g.ny = static_cast<int>(get<std::uint32_t>(is));
  g.extent = get<double>(is);
  g.values.resize(static_cast<size_t>(g.nx) * g.ny);
  for (auto& v : g.values) v = get<double>(is);
  if (!is) throw std::runtime_error("grid_io: truncated grid in " + path);
  return g;
}

}  // namespace beamsim
