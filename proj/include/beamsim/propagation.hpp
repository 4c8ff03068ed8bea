#pragma once

#include <vector>

#include "beamsim/complex_field.hpp"
#include "beamsim/phase_screen.hpp"

namespace beamsim {

/// Angular-spectrum propagation over distance dz in vacuum under the paraxial
/// approximation: each spectral component picks up exp(-i (kx^2+ky^2) dz / 2k).
/// Pure phase multiplier, so total power is conserved to round-off.
ComplexField vacuum_propagate(const ComplexField& field, double dz, double wavenumber);

/// Split-operator propagation through a stack of thin phase screens sorted by
/// screen_z in (0, L): vacuum gaps alternate with exp(i*phase) multiplications,
/// each screen sampled at time t under the given wind.
ComplexField split_step_propagate(const ComplexField& field,
                                  const std::vector<PhaseScreen>& screens,
                                  const WindModel& wind, double t, double total_dist,
                                  double wavenumber);

}  // namespace beamsim
