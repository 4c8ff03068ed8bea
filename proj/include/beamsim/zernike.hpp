#pragma once

#include <vector>

#include "beamsim/fiber_array.hpp"

namespace beamsim {

/// Zernike polynomials up to radial degree `max_degree`, mean-square
/// normalized on the aperture disc ((1/pi A^2) integral Z_q^2 = 1).
/// Ordering by radial degree; degree 1 lists the x-slope before the y-slope,
/// higher degrees run m ascending (so q=3,4,5 are oblique astigmatism,
/// defocus, vertical astigmatism). Piston is excluded:
/// Q = (N+1)(N+2)/2 - 1.
class ZernikeBasis {
 public:
  struct Index {
    int n;  // radial degree
    int m;  // azimuthal order, sign selects cos (+) / sin (-)
  };

  ZernikeBasis(int max_degree, double aperture_radius);

  int q_count() const { return static_cast<int>(indices_.size()); }
  int max_degree() const { return max_degree_; }
  double aperture_radius() const { return radius_; }
  const Index& index(int q) const { return indices_[q]; }

  /// Z_q at physical coordinates (x, y); the disc radius normalizes rho.
  double eval(int q, double x, double y) const;

  /// Numerical Gram matrix under the module's quadrature, Q x Q row-major.
  std::vector<double> gram() const;

 private:
  int max_degree_;
  double radius_;
  std::vector<Index> indices_;
};

/// K x Q transform between Zernike coefficients and piston/tip-tilt controls.
/// Piston rows average Z_q over each subaperture disc; tip/tilt rows take the
/// (x - x_n) and (y - y_n) first moments, all scaled by 4/(pi d^2).
struct RMatrix {
  int n_sub = 0;
  ControlMode mode = ControlMode::piston_tip_tilt;
  int q_count = 0;
  std::vector<double> coef;  // K x Q row-major

  int k_count() const {
    return mode == ControlMode::piston_only ? n_sub : 3 * n_sub;
  }
  double at(int k, int q) const { return coef[static_cast<size_t>(k) * q_count + q]; }
};

RMatrix build_r_matrix(const ArrayGeometry& geom, const ZernikeBasis& basis,
                       ControlMode mode, int radial_nodes = 32, int theta_nodes = 128);

/// u = R u_Z, reshaped into pistons/tips/tilts.
ControlVector zernike_to_controls(const std::vector<double>& u_z, const RMatrix& rm);

/// Gauss-Legendre nodes/weights on [0, 1] (exposed for the quadrature tests).
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace beamsim
