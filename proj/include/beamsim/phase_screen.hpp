#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "beamsim/complex_field.hpp"

namespace beamsim {

enum class ScreenKind { periodic, infinite };

/// Statistical description of one thin turbulence layer.
struct ScreenSpec {
  double cn2 = 0.0;          // refractive-index structure parameter, m^(-2/3)
  double dz_weight = 1.0;    // path length this screen stands in for, m
  double wavelength = 1.064e-6;  // m
  int n = 256;               // tile resolution, power of two
  double extent = 0.8;       // tile side, m
  ScreenKind kind = ScreenKind::periodic;
  double outer_scale = 10.0;   // L0, m (finite: needed for spectral synthesis)
  double inner_scale = 1e-3;   // l0, m (0 disables the inner-scale rolloff)

  void validate() const;
  double wavenumber() const { return 2.0 * 3.14159265358979323846 / wavelength; }
  /// Fried parameter r0 = (0.423 k^2 Cn2 dz)^(-3/5); +inf for cn2 == 0.
  double fried_r0() const;
};

struct WindModel {
  double speed = 0.0;          // m/s
  double dir_x = 1.0, dir_y = 0.0;  // unit vector
  void validate() const;
};

/// One frozen turbulence realization. Periodic screens hold a single tile
/// sampled with wrap-around; infinite screens grow an append-only strip of
/// tiles along the wind axis, cross-faded over an 8-pixel seam so already
/// generated samples never change.
class PhaseScreen {
 public:
  PhaseScreen(const ScreenSpec& spec, std::uint64_t seed, double screen_z);

  /// Wraps an externally supplied tile (snapshot replay, synthetic tests).
  static PhaseScreen from_tile(const ScreenSpec& spec, std::vector<double> tile,
                               double screen_z);

  const ScreenSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  double screen_z() const { return z_; }

  /// Base tile (strip index 0), row-major [ix*n + iy], radians.
  const std::vector<double>& tile() const;

  /// Phase tile translated by wind.speed*t along wind.direction, bilinear
  /// sub-pixel interpolation. Periodic kind wraps; infinite kind extends the
  /// strip on demand (deterministic per strip index).
  std::vector<double> sample(double t, const WindModel& wind) const;

  /// Horizontal span generated so far, meters (infinite kind; extent otherwise).
  double generated_span() const;

 private:
  PhaseScreen(const ScreenSpec& spec, std::uint64_t seed, double screen_z,
              std::vector<double> tile);
  std::vector<double>& strip_tile(long long index) const;
  double strip_value(long long global_col, int row) const;

  ScreenSpec spec_;
  std::uint64_t seed_ = 0;
  double z_ = 0.0;
  bool external_tile_ = false;
  mutable std::map<long long, std::vector<double>> tiles_;  // append-only
  mutable int axis_ = -1;  // 0: strip along x, 1: along y; latched on first use
};

/// Spectral synthesis of one tile (used by PhaseScreen; exposed for tests).
std::vector<double> synthesize_tile(const ScreenSpec& spec, std::uint64_t seed);

}  // namespace beamsim
