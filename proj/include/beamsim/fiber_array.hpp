#pragma once

#include <vector>

#include "beamsim/complex_field.hpp"

namespace beamsim {

/// Fiber-array transmitter geometry: disc subapertures of diameter d about
/// centers rho_n, each emitting a truncated Gaussian beamlet. `a0` is the
/// 1/e intensity fall-off radius, i.e. the amplitude carries
/// exp(-|rho - rho_n|^2 / (2 a0^2)).
struct ArrayGeometry {
  std::vector<double> cx, cy;  // subaperture centers, m
  double d = 0.06;             // subaperture diameter, m
  double a0 = 0.054;           // beamlet 1/e intensity radius, m
  double amplitude = 1.0;      // A0, field units

  int n_sub() const { return static_cast<int>(cx.size()); }
  void validate() const;
  /// Radius of the smallest origin-centered disc containing all subapertures.
  double aperture_radius() const;
};

/// Densely packed hexagonal layout: a central subaperture, a ring of 6 and a
/// ring of 12, neighbor pitch exactly d. rings=1 gives 7, rings=2 gives 19.
ArrayGeometry hex_array(int rings, double d, double a0, double amplitude = 1.0);

enum class ControlMode { piston_only, piston_tip_tilt };

/// Per-subaperture controls. Pistons are path lengths in meters (applied as
/// phase k*c_n); tips/tilts are slopes in m/m. Flat layout:
/// [c_1..c_N, s_1x..s_Nx, s_1y..s_Ny].
struct ControlVector {
  ControlMode mode = ControlMode::piston_tip_tilt;
  std::vector<double> piston, tip_x, tip_y;

  static ControlVector zeros(int n_sub, ControlMode mode);
  static ControlVector from_flat(const std::vector<double>& flat, int n_sub,
                                 ControlMode mode);
  std::vector<double> to_flat() const;
  int dim() const {
    return static_cast<int>(piston.size()) * (mode == ControlMode::piston_only ? 1 : 3);
  }
};

/// Fiber-array output field on the given grid:
///   U0 = A0 sum_n H_n exp(-|rho-rho_n|^2/(2 a0^2)) exp(i k (s_n.(rho-rho_n) + c_n))
ComplexField source_field(const ArrayGeometry& geom, const ControlVector& ctrl,
                          int nx, int ny, double extent, double wavenumber);

/// Precomputed pixel mask for repeated source_field evaluations on one grid.
class SourceFieldBuilder {
 public:
  SourceFieldBuilder(const ArrayGeometry& geom, int nx, int ny, double extent,
                     double wavenumber);
  ComplexField build(const ControlVector& ctrl) const;

 private:
  struct Pixel {
    int index_flat;
    int sub;
    double amp, dx, dy;
  };
  int nx_, ny_;
  double extent_, k_;
  std::vector<Pixel> pixels_;
};

}  // namespace beamsim
