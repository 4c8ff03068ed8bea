#include "beamsim/phase_screen.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "beamsim/fft.hpp"
#include "beamsim/rng.hpp"

namespace beamsim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kSeamOverlap = 8;    // cross-fade width between strip tiles, px
constexpr int kDcBlock = 3;        // FFT cells around DC replaced by cell-integrated modes
constexpr int kSubharmonicLevels = 6;
constexpr int kCellSubsample = 32;

// von Karman phase PSD in cyclic frequency units, rad^2 m^2:
//   Phi(nu) = 0.023 r0^(-5/3) exp(-(nu/num)^2) / (nu^2 + nu0^2)^(11/6)
struct Psd {
  double coeff, nu0_sq, inv_num_sq;
  explicit Psd(const ScreenSpec& s) {
    coeff = 0.023 * std::pow(s.fried_r0(), -5.0 / 3.0);
    const double nu0 = 1.0 / s.outer_scale;
    nu0_sq = nu0 * nu0;
    if (s.inner_scale > 0.0) {
      const double num = 5.92 / (2.0 * kPi * s.inner_scale);
      inv_num_sq = 1.0 / (num * num);
    } else {
      inv_num_sq = 0.0;
    }
  }
  double operator()(double nu_sq) const {
    return coeff * std::exp(-nu_sq * inv_num_sq) *
           std::pow(nu_sq + nu0_sq, -11.0 / 6.0);
  }
};

struct LowFreqMode {
  double weight;  // integrated PSD over the spectral cell, rad^2
  double nu_x, nu_y;  // placement, cycles/m
};

// Integrates the PSD over a square spectral cell (midpoint subsampling) and
// returns the per-axis RMS frequencies. Point-sampling these cells badly
// underweights the kappa->0 divergence, which is what breaks the structure
// function of plain FFT screens at large separations.
LowFreqMode integrate_cell(const Psd& psd, double cx, double cy, double d) {
  double w = 0.0, mx2 = 0.0, my2 = 0.0;
  for (int a = 0; a < kCellSubsample; ++a) {
    const double x = cx + ((a + 0.5) / kCellSubsample - 0.5) * d;
    for (int b = 0; b < kCellSubsample; ++b) {
      const double y = cy + ((b + 0.5) / kCellSubsample - 0.5) * d;
      const double p = psd(x * x + y * y);
      w += p;
      mx2 += p * x * x;
      my2 += p * y * y;
    }
  }
  LowFreqMode m;
  const double da = (d / kCellSubsample) * (d / kCellSubsample);
  m.weight = w * da;
  m.nu_x = std::sqrt(mx2 / w);
  m.nu_y = std::sqrt(my2 / w);
  return m;
}

std::vector<LowFreqMode> low_freq_modes(const ScreenSpec& spec) {
  const Psd psd(spec);
  const double d0 = 1.0 / spec.extent;
  std::vector<LowFreqMode> modes;
  // FFT cells adjacent to DC, pulled out of the lattice and placed at their
  // per-axis RMS frequency.
  for (int i = -kDcBlock; i <= kDcBlock; ++i)
    for (int j = -kDcBlock; j <= kDcBlock; ++j) {
      if (i == 0 && j == 0) continue;
      LowFreqMode m = integrate_cell(psd, i * d0, j * d0, d0);
      if (i < 0) m.nu_x = -m.nu_x;
      if (j < 0) m.nu_y = -m.nu_y;
      modes.push_back(m);
    }
  // Subharmonic subdivision of the DC cell.
  for (int level = 1; level <= kSubharmonicLevels; ++level) {
    const double dp = d0 / std::pow(3.0, level);
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j) {
        if (i == 0 && j == 0) continue;
        LowFreqMode m = integrate_cell(psd, i * dp, j * dp, dp);
        if (i < 0) m.nu_x = -m.nu_x;
        if (j < 0) m.nu_y = -m.nu_y;
        modes.push_back(m);
      }
  }
  return modes;
}

}  // namespace

void ScreenSpec::validate() const {
  if (cn2 < 0.0) throw std::invalid_argument("ScreenSpec: cn2 must be >= 0");
  if (!(dz_weight > 0.0)) throw std::invalid_argument("ScreenSpec: dz_weight must be > 0");
  if (!(wavelength > 0.0)) throw std::invalid_argument("ScreenSpec: wavelength must be > 0");
  if (!is_pow2(n)) throw std::invalid_argument("ScreenSpec: n must be a power of two");
  if (!(extent > 0.0)) throw std::invalid_argument("ScreenSpec: extent must be > 0");
  if (inner_scale < 0.0 || !(outer_scale > inner_scale))
    throw std::invalid_argument("ScreenSpec: need L0 > l0 >= 0");
}

double ScreenSpec::fried_r0() const {
  if (cn2 == 0.0) return std::numeric_limits<double>::infinity();
  const double k = wavenumber();
  return std::pow(0.423 * k * k * cn2 * dz_weight, -3.0 / 5.0);
}

void WindModel::validate() const {
  if (speed < 0.0) throw std::invalid_argument("WindModel: speed must be >= 0");
  const double norm = std::hypot(dir_x, dir_y);
  if (std::abs(norm - 1.0) > 1e-9)
    throw std::invalid_argument("WindModel: direction must be a unit vector");
}

std::vector<double> synthesize_tile(const ScreenSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int n = spec.n;
  const size_t total = static_cast<size_t>(n) * n;
  std::vector<double> tile(total, 0.0);
  if (spec.cn2 == 0.0) return tile;

  const Psd psd(spec);
  const double g = spec.extent;
  Rng rng(seed);

  // FFT part: complex gaussian noise shaped by sqrt(PSD)*dnu. The near-DC
  // block is handled by explicit modes below (periodic kind keeps it on the
  // lattice so the tile stays exactly periodic).
  std::vector<cplx> spec_grid(total);
  for (int i = 0; i < n; ++i) {
    const int mi = (i <= n / 2 - 1) ? i : i - n;
    for (int j = 0; j < n; ++j) {
      const int mj = (j <= n / 2 - 1) ? j : j - n;
      const double re = rng.gauss();
      const double im = rng.gauss();
      double amp = 0.0;
      const bool near_dc = std::abs(mi) <= kDcBlock && std::abs(mj) <= kDcBlock;
      if (!(mi == 0 && mj == 0) && !near_dc) {
        const double nx = mi / g, ny = mj / g;
        amp = std::sqrt(psd(nx * nx + ny * ny)) / g;
      }
      spec_grid[static_cast<size_t>(i) * n + j] = cplx(re * amp, im * amp);
    }
  }
  ifft2(spec_grid, n, n);
  const double nn = static_cast<double>(n) * n;
  for (size_t idx = 0; idx < total; ++idx) tile[idx] = spec_grid[idx].real() * nn;

  if (spec.kind == ScreenKind::periodic) {
    // Periodic tiles cannot host off-lattice modes; recover the near-DC power
    // with cell-integrated weights at the lattice positions instead.
    std::vector<cplx> dc_grid(total, cplx(0.0, 0.0));
    const double d0 = 1.0 / g;
    for (int mi = -kDcBlock; mi <= kDcBlock; ++mi)
      for (int mj = -kDcBlock; mj <= kDcBlock; ++mj) {
        if (mi == 0 && mj == 0) continue;
        const double re = rng.gauss();
        const double im = rng.gauss();
        const LowFreqMode m = integrate_cell(psd, mi * d0, mj * d0, d0);
        const int i = (mi + n) % n, j = (mj + n) % n;
        const double amp = std::sqrt(m.weight) / nn;  // undo the N^2 below
        dc_grid[static_cast<size_t>(i) * n + j] = cplx(re * amp, im * amp);
      }
    ifft2(dc_grid, n, n);
    for (size_t idx = 0; idx < total; ++idx) tile[idx] += dc_grid[idx].real() * nn * nn;
  } else {
    // Explicit low-frequency modes: cell-integrated, RMS-placed.
    const auto modes = low_freq_modes(spec);
    std::vector<double> ax(n), bx(n), cy(n), sy(n);
    for (const auto& m : modes) {
      const double g1 = rng.gauss();
      const double g2 = rng.gauss();
      const double w = std::sqrt(m.weight);
      for (int i = 0; i < n; ++i) {
        const double ph = 2.0 * kPi * m.nu_x * ((i + 0.5) * g / n);
        const double c = std::cos(ph), s = std::sin(ph);
        ax[i] = w * (g1 * c - g2 * s);
        bx[i] = w * (g1 * s + g2 * c);
      }
      for (int j = 0; j < n; ++j) {
        const double ph = 2.0 * kPi * m.nu_y * ((j + 0.5) * g / n);
        cy[j] = std::cos(ph);
        sy[j] = std::sin(ph);
      }
      for (int i = 0; i < n; ++i) {
        double* row = tile.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) row[j] += ax[i] * cy[j] - bx[i] * sy[j];
      }
    }
  }

  double mean = 0.0;
  for (double v : tile) mean += v;
  mean /= static_cast<double>(total);
  for (double& v : tile) v -= mean;
  return tile;
}

PhaseScreen::PhaseScreen(const ScreenSpec& spec, std::uint64_t seed, double screen_z)
    : spec_(spec), seed_(seed), z_(screen_z) {
  spec_.validate();
  tiles_.emplace(0, synthesize_tile(spec_, hash_combine(seed_, 0)));
}

PhaseScreen PhaseScreen::from_tile(const ScreenSpec& spec, std::vector<double> tile,
                                   double screen_z) {
  spec.validate();
  if (tile.size() != static_cast<size_t>(spec.n) * spec.n)
    throw std::invalid_argument("PhaseScreen: tile size mismatch");
  PhaseScreen s(spec, 0, screen_z, std::move(tile));
  return s;
}

// private delegate used by from_tile
PhaseScreen::PhaseScreen(const ScreenSpec& spec, std::uint64_t seed, double screen_z,
                         std::vector<double> tile)
    : spec_(spec), seed_(seed), z_(screen_z), external_tile_(true) {
  tiles_.emplace(0, std::move(tile));
}

const std::vector<double>& PhaseScreen::tile() const { return tiles_.at(0); }

std::vector<double>& PhaseScreen::strip_tile(long long index) const {
  auto it = tiles_.find(index);
  if (it != tiles_.end()) return it->second;
  if (external_tile_)
    throw std::runtime_error("PhaseScreen: cannot extend an externally supplied tile");
  auto inserted = tiles_.emplace(
      index, synthesize_tile(spec_, hash_combine(seed_, static_cast<std::uint64_t>(index))));
  return inserted.first->second;
}

double PhaseScreen::strip_value(long long gc, int row) const {
  const int n = spec_.n;
  const int stride = n - kSeamOverlap;
  long long k = gc >= 0 ? gc / stride : -(((-gc) + stride - 1) / stride);
  int p = static_cast<int>(gc - k * static_cast<long long>(stride));
  // p in [0, stride)
  const std::vector<double>& cur = strip_tile(k);
  auto value = [&](const std::vector<double>& t, int col) {
    return axis_ == 0 ? t[static_cast<size_t>(col) * n + row]
                      : t[static_cast<size_t>(row) * n + col];
  };
  if (p >= kSeamOverlap) return value(cur, p);
  // seam: blend from the previous tile's tail into this tile's head
  const std::vector<double>& prev = strip_tile(k - 1);
  const double w = (p + 1.0) / (kSeamOverlap + 1.0);
  return w * value(cur, p) + (1.0 - w) * value(prev, p + stride);
}

std::vector<double> PhaseScreen::sample(double t, const WindModel& wind) const {
  wind.validate();
  if (t < 0.0) throw std::invalid_argument("PhaseScreen: t must be >= 0");
  const int n = spec_.n;
  const size_t total = static_cast<size_t>(n) * n;
  const std::vector<double>& base = tiles_.at(0);

  const double pitch = spec_.extent / n;
  const double dx = wind.speed * t * wind.dir_x / pitch;
  const double dy = wind.speed * t * wind.dir_y / pitch;

  if (dx == 0.0 && dy == 0.0) return base;

  std::vector<double> out(total);
  if (spec_.kind == ScreenKind::periodic) {
    // translate by (dx, dy) with wrap-around, bilinear
    const double fx = std::floor(dx), fy = std::floor(dy);
    const int sx = static_cast<int>(fx), sy = static_cast<int>(fy);
    const double ax = dx - fx, ay = dy - fy;
    auto wrap = [n](int v) { return ((v % n) + n) % n; };
    for (int i = 0; i < n; ++i) {
      const int i0 = wrap(i - sx - 1), i1 = wrap(i - sx);
      for (int j = 0; j < n; ++j) {
        const int j0 = wrap(j - sy - 1), j1 = wrap(j - sy);
        const double v00 = base[static_cast<size_t>(i0) * n + j0];
        const double v01 = base[static_cast<size_t>(i0) * n + j1];
        const double v10 = base[static_cast<size_t>(i1) * n + j0];
        const double v11 = base[static_cast<size_t>(i1) * n + j1];
        out[static_cast<size_t>(i) * n + j] =
            ax * (ay * v00 + (1.0 - ay) * v01) + (1.0 - ax) * (ay * v10 + (1.0 - ay) * v11);
      }
    }
    return out;
  }

  // infinite strip: wind must align with one axis
  int axis;
  double shift;
  if (wind.dir_y == 0.0) {
    axis = 0;
    shift = dx;
  } else if (wind.dir_x == 0.0) {
    axis = 1;
    shift = dy;
  } else {
    throw std::invalid_argument("PhaseScreen: infinite kind needs axis-aligned wind");
  }
  if (axis_ == -1) axis_ = axis;
  if (axis_ != axis)
    throw std::invalid_argument("PhaseScreen: wind axis changed after first sample");

  const double fs = std::floor(shift);
  const long long s0 = static_cast<long long>(fs);
  const double frac = shift - fs;
  for (int along = 0; along < n; ++along) {
    const long long q1 = along - s0;
    const long long q0 = q1 - 1;
    for (int row = 0; row < n; ++row) {
      const double v = frac * strip_value(q0, row) + (1.0 - frac) * strip_value(q1, row);
      const size_t idx = axis_ == 0 ? static_cast<size_t>(along) * n + row
                                    : static_cast<size_t>(row) * n + along;
      out[idx] = v;
    }
  }
  return out;
}

double PhaseScreen::generated_span() const {
  const int stride = spec_.n - kSeamOverlap;
  if (spec_.kind == ScreenKind::periodic || tiles_.empty()) return spec_.extent;
  const long long lo = tiles_.begin()->first;
  const long long hi = tiles_.rbegin()->first;
  const double pitch = spec_.extent / spec_.n;
  return ((hi - lo) * static_cast<double>(stride) + spec_.n) * pitch;
}

}  // namespace beamsim
