#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace beamsim {

/// Square power sensor centered on axis. Crops the simulation grid to the
/// sensor square and block-sums to the controller resolution; block summing
/// conserves integrated intensity.
struct PvaSensor {
  double side = 0.2;   // D, m
  int out_res = 64;    // controller image resolution

  /// Pixel-index crop [lo, hi) of an n-point axis of physical length extent.
  static void crop_range(int n, double extent, double side, int& lo, int& hi);

  std::vector<double> controller_image(const std::vector<double>& intensity, int nx,
                                       int ny, double extent) const;
};

/// Gaussian-weighted power over the sensor square:
///   integral_PVA I(rho) exp(-|rho|^2 / beta^2) d^2 rho.
double pva_weighted_power(const std::vector<double>& intensity, int nx, int ny,
                          double extent, double pva_side, double beta);

/// Weighted power normalized by the vacuum optimum.
double smooth_strehl(double weighted_power, double j_vac);

struct TrackingParams {
  double beta1 = 0.4;
  double beta2 = 1.0;
  int n = 256;
  double half_width = 5.0;
};

/// Unit-peak Gaussian spot at (rho(t) - u):
///   I(x,y) = exp(-[(x - rho_x + u1)^2 + (y - rho_y + u2)^2] / beta1^2)
std::vector<double> tracking_intensity(const TrackingParams& p, double rho_x,
                                       double rho_y, double u1, double u2);

/// Spot-holding metric, numerically integrated:
///   J = (1/pi)(1/beta1^2 + 1/beta2^2) integral I exp(-(x^2+y^2)/beta2^2) dx dy
double tracking_metric(const TrackingParams& p, const std::vector<double>& image);

struct MaximizeOptions {
  int max_iters = 60000;
  int window = 500;        // stall window for the convergence check
  double tol = 1e-5;       // minimum improvement of the best value per window
  double sigma = 0.05;     // perturbation size in units of channel_scale
  double gain = 100.0;     // SPGD gain on the normalized metric
  int polish_sweeps = 3;
  std::uint64_t seed = 1;
  std::vector<double> channel_scale;  // per-channel step scale; empty = all 1
};

struct MaximizeResult {
  double value = 0.0;
  std::vector<double> u_opt;
  int iters = 0;
  bool converged = false;
};

/// Derivative-free maximizer used for the vacuum normalization constant:
/// SPGD with annealed perturbations to convergence, then a deterministic
/// per-coordinate parabolic polish. Throws on non-convergence, carrying the
/// best value found in the exception message.
MaximizeResult maximize_metric(const std::function<double(const std::vector<double>&)>& f,
                               int dim, const MaximizeOptions& opt);

}  // namespace beamsim
