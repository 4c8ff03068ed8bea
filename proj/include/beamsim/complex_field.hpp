#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace beamsim {

using cplx = std::complex<double>;

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// Sampled complex optical amplitude on a square-pixel grid.
/// `extent` is the physical side length along x; pixels are square, so the
/// y side is extent * ny / nx. Pixel centers sit at (i + 0.5) * pitch - extent/2.
class ComplexField {
 public:
  ComplexField(int nx, int ny, double extent)
      : nx_(nx), ny_(ny), extent_(extent), samples_(static_cast<size_t>(nx) * ny) {
    if (!is_pow2(nx) || !is_pow2(ny))
      throw std::invalid_argument("ComplexField: grid dimensions must be powers of two");
    if (!(extent > 0.0))
      throw std::invalid_argument("ComplexField: extent must be positive");
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double extent() const { return extent_; }
  double pitch() const { return extent_ / nx_; }

  double x(int i) const { return (i + 0.5) * pitch() - 0.5 * extent_; }
  double y(int j) const { return (j + 0.5) * pitch() - 0.5 * extent_ * ny_ / nx_; }

  cplx& at(int i, int j) { return samples_[static_cast<size_t>(i) * ny_ + j]; }
  const cplx& at(int i, int j) const { return samples_[static_cast<size_t>(i) * ny_ + j]; }

  std::vector<cplx>& samples() { return samples_; }
  const std::vector<cplx>& samples() const { return samples_; }

  /// Integrated |u|^2 over the grid (pitch^2 weighted).
  double total_power() const {
    double s = 0.0;
    for (const auto& v : samples_) s += std::norm(v);
    return s * pitch() * pitch();
  }

  /// Intensity image |u|^2 (no pitch weighting).
  std::vector<double> intensity() const {
    std::vector<double> out(samples_.size());
    for (size_t i = 0; i < samples_.size(); ++i) out[i] = std::norm(samples_[i]);
    return out;
  }

 private:
  int nx_, ny_;
  double extent_;
  std::vector<cplx> samples_;
};

}  // namespace beamsim
