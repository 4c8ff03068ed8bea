#pragma once

#include <complex>
#include <vector>

namespace beamsim {

// Thin wrapper over FFTW double-precision c2c transforms with a per-size plan
// cache. Plans are created with FFTW_ESTIMATE so the chosen algorithm (and
// hence the exact round-off pattern) is reproducible run to run.
// Transforms are unnormalized; ifft2 divides by nx*ny.
void fft2(std::complex<double>* data, int nx, int ny);
void ifft2(std::complex<double>* data, int nx, int ny);

void fft2(std::vector<std::complex<double>>& data, int nx, int ny);
void ifft2(std::vector<std::complex<double>>& data, int nx, int ny);

/// Spatial angular frequency (rad/m) of FFT bin i for an n-point axis of
/// physical length `extent`.
inline double fft_kappa(int i, int n, double extent) {
  const int m = (i <= n / 2 - 1) ? i : i - n;
  return 2.0 * 3.14159265358979323846 * m / extent;
}

}  // namespace beamsim
