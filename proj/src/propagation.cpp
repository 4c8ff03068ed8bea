#include "beamsim/propagation.hpp"

#include <cmath>
#include <stdexcept>

#include "beamsim/fft.hpp"

namespace beamsim {

ComplexField vacuum_propagate(const ComplexField& field, double dz, double wavenumber) {
  if (dz < 0.0) throw std::invalid_argument("vacuum_propagate: dz must be >= 0");
  ComplexField out = field;
  if (dz == 0.0) return out;

  const int nx = out.nx(), ny = out.ny();
  const double ext_x = out.extent();
  const double ext_y = out.extent() * ny / nx;
  fft2(out.samples(), nx, ny);
  const double c = dz / (2.0 * wavenumber);
  for (int i = 0; i < nx; ++i) {
    const double kx = fft_kappa(i, nx, ext_x);
    for (int j = 0; j < ny; ++j) {
      const double ky = fft_kappa(j, ny, ext_y);
      const double phase = -c * (kx * kx + ky * ky);
      out.at(i, j) *= cplx(std::cos(phase), std::sin(phase));
    }
  }
  ifft2(out.samples(), nx, ny);
  return out;
}

ComplexField split_step_propagate(const ComplexField& field,
                                  const std::vector<PhaseScreen>& screens,
                                  const WindModel& wind, double t, double total_dist,
                                  double wavenumber) {
  double prev_z = 0.0;
  for (const auto& s : screens) {
    if (!(s.screen_z() > prev_z) || !(s.screen_z() < total_dist))
      throw std::invalid_argument(
          "split_step_propagate: screens must be sorted, inside (0, L)");
    prev_z = s.screen_z();
  }

  ComplexField out = field;
  double z = 0.0;
  for (const auto& s : screens) {
    out = vacuum_propagate(out, s.screen_z() - z, wavenumber);
    z = s.screen_z();
    const auto phase = s.sample(t, wind);
    const int n = s.spec().n;
    if (n != out.nx() || n != out.ny() || s.spec().extent != out.extent())
      throw std::invalid_argument("split_step_propagate: screen/grid geometry mismatch");
    auto& samples = out.samples();
    for (size_t idx = 0; idx < samples.size(); ++idx)
      samples[idx] *= cplx(std::cos(phase[idx]), std::sin(phase[idx]));
  }
  return vacuum_propagate(out, total_dist - z, wavenumber);
}

}  // namespace beamsim
