#include "beamsim/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "beamsim/rng.hpp"

namespace beamsim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void PvaSensor::crop_range(int n, double extent, double side, int& lo, int& hi) {
  const double pitch = extent / n;
  lo = n;
  hi = 0;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) * pitch - 0.5 * extent;
    if (std::abs(x) <= 0.5 * side) {
      lo = std::min(lo, i);
      hi = std::max(hi, i + 1);
    }
  }
  if (lo >= hi) throw std::invalid_argument("PvaSensor: sensor smaller than one pixel");
}

std::vector<double> PvaSensor::controller_image(const std::vector<double>& intensity,
                                                int nx, int ny, double extent) const {
  int lo_x, hi_x, lo_y, hi_y;
  crop_range(nx, extent, side, lo_x, hi_x);
  crop_range(ny, extent * ny / nx, side, lo_y, hi_y);
  const int cx = hi_x - lo_x, cy = hi_y - lo_y;
  if (cx != cy) throw std::invalid_argument("PvaSensor: non-square crop");
  if (cx % out_res != 0)
    throw std::invalid_argument("PvaSensor: crop " + std::to_string(cx) +
                                " not divisible by output resolution " +
                                std::to_string(out_res));
  const int f = cx / out_res;
  std::vector<double> out(static_cast<size_t>(out_res) * out_res, 0.0);
  for (int i = 0; i < cx; ++i) {
    const double* row = intensity.data() + static_cast<size_t>(lo_x + i) * ny + lo_y;
    double* orow = out.data() + static_cast<size_t>(i / f) * out_res;
    for (int j = 0; j < cy; ++j) orow[j / f] += row[j];
  }
  return out;
}

double pva_weighted_power(const std::vector<double>& intensity, int nx, int ny,
                          double extent, double pva_side, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("pva_weighted_power: beta must be > 0");
  const double pitch = extent / nx;
  int lo_x, hi_x, lo_y, hi_y;
  PvaSensor::crop_range(nx, extent, pva_side, lo_x, hi_x);
  PvaSensor::crop_range(ny, extent * ny / nx, pva_side, lo_y, hi_y);
  const double inv_b2 = 1.0 / (beta * beta);
  const double ext_y = extent * ny / nx;
  double acc = 0.0;
  for (int i = lo_x; i < hi_x; ++i) {
    const double x = (i + 0.5) * pitch - 0.5 * extent;
    const double* row = intensity.data() + static_cast<size_t>(i) * ny;
    for (int j = lo_y; j < hi_y; ++j) {
      const double y = (j + 0.5) * pitch - 0.5 * ext_y;
      acc += row[j] * std::exp(-(x * x + y * y) * inv_b2);
    }
  }
  return acc * pitch * pitch;
}

double smooth_strehl(double weighted_power, double j_vac) {
  if (!(j_vac > 0.0))
    throw std::runtime_error("smooth_strehl: vacuum normalization not configured");
  return weighted_power / j_vac;
}

std::vector<double> tracking_intensity(const TrackingParams& p, double rho_x,
                                       double rho_y, double u1, double u2) {
  std::vector<double> img(static_cast<size_t>(p.n) * p.n);
  const double pitch = 2.0 * p.half_width / p.n;
  const double inv_b1sq = 1.0 / (p.beta1 * p.beta1);
  const double sx = rho_x - u1, sy = rho_y - u2;
  for (int i = 0; i < p.n; ++i) {
    const double x = (i + 0.5) * pitch - p.half_width;
    const double ex = (x - sx) * (x - sx);
    double* row = img.data() + static_cast<size_t>(i) * p.n;
    for (int j = 0; j < p.n; ++j) {
      const double y = (j + 0.5) * pitch - p.half_width;
      row[j] = std::exp(-(ex + (y - sy) * (y - sy)) * inv_b1sq);
    }
  }
  return img;
}

double tracking_metric(const TrackingParams& p, const std::vector<double>& image) {
  const double pitch = 2.0 * p.half_width / p.n;
  const double inv_b2sq = 1.0 / (p.beta2 * p.beta2);
  double acc = 0.0;
  for (int i = 0; i < p.n; ++i) {
    const double x = (i + 0.5) * pitch - p.half_width;
    const double* row = image.data() + static_cast<size_t>(i) * p.n;
    for (int j = 0; j < p.n; ++j) {
      const double y = (j + 0.5) * pitch - p.half_width;
      acc += row[j] * std::exp(-(x * x + y * y) * inv_b2sq);
    }
  }
  const double norm = (1.0 / kPi) * (1.0 / (p.beta1 * p.beta1) + 1.0 / (p.beta2 * p.beta2));
  return norm * acc * pitch * pitch;
}

MaximizeResult maximize_metric(const std::function<double(const std::vector<double>&)>& f,
                               int dim, const MaximizeOptions& opt) {
  std::vector<double> scale = opt.channel_scale;
  if (scale.empty()) scale.assign(dim, 1.0);
  if (static_cast<int>(scale.size()) != dim)
    throw std::invalid_argument("maximize_metric: channel_scale size mismatch");

  Rng rng(opt.seed);
  std::vector<double> u(dim, 0.0), du(dim), trial(dim);
  double j_cur = f(u);
  const double f_ref = std::max(std::abs(j_cur), 1e-300);

  MaximizeResult res;
  res.u_opt = u;
  res.value = j_cur;

  double sigma = opt.sigma;
  double window_best = j_cur;
  int it = 0;
  bool stalled = false;
  for (; it < opt.max_iters; ++it) {
    const double root3 = 1.7320508075688772;
    for (int k = 0; k < dim; ++k) du[k] = root3 * sigma * scale[k] * rng.uniform_sym();
    for (int k = 0; k < dim; ++k) trial[k] = u[k] + du[k];
    const double j_trial = f(trial);
    const double dj = (j_trial - j_cur) / f_ref;
    for (int k = 0; k < dim; ++k) u[k] += opt.gain * dj * du[k];
    j_cur = f(u);
    if (j_cur > res.value) {
      res.value = j_cur;
      res.u_opt = u;
    }
    if ((it + 1) % opt.window == 0) {
      const double gain_rel = (res.value - window_best) / f_ref;
      if (gain_rel < opt.tol) {
        if (sigma <= opt.sigma / 16.0) {
          stalled = true;
          break;
        }
        sigma *= 0.5;  // anneal and keep going
      }
      window_best = res.value;
    }
  }
  res.iters = it;
  res.converged = stalled;
  if (!res.converged)
    throw std::runtime_error("maximize_metric: no convergence in iteration budget; best " +
                             std::to_string(res.value));

  // deterministic parabolic polish, coordinate at a time
  u = res.u_opt;
  j_cur = res.value;
  for (int sweep = 0; sweep < opt.polish_sweeps; ++sweep) {
    for (int k = 0; k < dim; ++k) {
      double h = 0.25 * opt.sigma * scale[k];
      for (int refine = 0; refine < 2; ++refine) {
        trial = u;
        trial[k] = u[k] + h;
        const double fp = f(trial);
        trial[k] = u[k] - h;
        const double fm = f(trial);
        const double denom = fp - 2.0 * j_cur + fm;
        double step;
        if (denom < 0.0) {
          step = 0.5 * h * (fp - fm) / (-denom);
          if (std::abs(step) > 2.0 * h) step = (step > 0 ? 2.0 : -2.0) * h;
        } else {
          step = fp > fm ? h : -h;  // not concave here; move toward the better side
        }
        trial = u;
        trial[k] = u[k] + step;
        const double ft = f(trial);
        if (ft > j_cur) {
          u = trial;
          j_cur = ft;
        }
        h *= 0.25;
      }
    }
  }
  if (j_cur > res.value) {
    res.value = j_cur;
    res.u_opt = u;
  }
  return res;
}

}  // namespace beamsim
