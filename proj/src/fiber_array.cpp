#include "beamsim/fiber_array.hpp"

#include <cmath>
#include <stdexcept>

namespace beamsim {

void ArrayGeometry::validate() const {
  if (cx.size() != cy.size() || cx.empty())
    throw std::invalid_argument("ArrayGeometry: centers malformed");
  if (!(d > 0.0) || !(a0 > 0.0) || amplitude < 0.0)
    throw std::invalid_argument("ArrayGeometry: need d > 0, a0 > 0, A0 >= 0");
  const double min_sep = d - 1e-12 * d;
  for (size_t i = 0; i < cx.size(); ++i)
    for (size_t j = i + 1; j < cx.size(); ++j) {
      const double sep = std::hypot(cx[i] - cx[j], cy[i] - cy[j]);
      if (sep < min_sep)
        throw std::invalid_argument("ArrayGeometry: overlapping subapertures");
    }
}

double ArrayGeometry::aperture_radius() const {
  double r = 0.0;
  for (size_t i = 0; i < cx.size(); ++i)
    r = std::max(r, std::hypot(cx[i], cy[i]) + 0.5 * d);
  return r;
}

ArrayGeometry hex_array(int rings, double d, double a0, double amplitude) {
  if (rings < 0) throw std::invalid_argument("hex_array: rings must be >= 0");
  ArrayGeometry g;
  g.d = d;
  g.a0 = a0;
  g.amplitude = amplitude;
  // axial hex lattice, pitch d
  const double ux = d, vx = 0.5 * d, vy = 0.5 * std::sqrt(3.0) * d;
  for (int q = -rings; q <= rings; ++q)
    for (int r = -rings; r <= rings; ++r) {
      if (std::abs(q + r) > rings) continue;  // hex distance
      g.cx.push_back(q * ux + r * vx);
      g.cy.push_back(r * vy);
    }
  g.validate();
  return g;
}

ControlVector ControlVector::zeros(int n_sub, ControlMode mode) {
  ControlVector c;
  c.mode = mode;
  c.piston.assign(n_sub, 0.0);
  c.tip_x.assign(n_sub, 0.0);
  c.tip_y.assign(n_sub, 0.0);
  return c;
}

ControlVector ControlVector::from_flat(const std::vector<double>& flat, int n_sub,
                                       ControlMode mode) {
  const size_t expect =
      mode == ControlMode::piston_only ? static_cast<size_t>(n_sub) : 3u * n_sub;
  if (flat.size() != expect)
    throw std::invalid_argument("ControlVector: flat length mismatch");
  ControlVector c = zeros(n_sub, mode);
  for (int i = 0; i < n_sub; ++i) c.piston[i] = flat[i];
  if (mode == ControlMode::piston_tip_tilt)
    for (int i = 0; i < n_sub; ++i) {
      c.tip_x[i] = flat[n_sub + i];
      c.tip_y[i] = flat[2 * n_sub + i];
    }
  return c;
}

std::vector<double> ControlVector::to_flat() const {
  std::vector<double> flat(piston);
  if (mode == ControlMode::piston_tip_tilt) {
    flat.insert(flat.end(), tip_x.begin(), tip_x.end());
    flat.insert(flat.end(), tip_y.begin(), tip_y.end());
  }
  return flat;
}

SourceFieldBuilder::SourceFieldBuilder(const ArrayGeometry& geom, int nx, int ny,
                                       double extent, double wavenumber)
    : nx_(nx), ny_(ny), extent_(extent), k_(wavenumber) {
  geom.validate();
  ComplexField probe(nx, ny, extent);  // geometry checks + coordinates
  const double half = 0.5 * geom.d;
  const double half_sq = half * half;
  const double inv_2a0sq = 1.0 / (2.0 * geom.a0 * geom.a0);
  for (int n = 0; n < geom.n_sub(); ++n) {
    if (std::hypot(geom.cx[n], geom.cy[n]) + half > 0.5 * extent)
      throw std::invalid_argument("SourceFieldBuilder: grid does not cover the array");
    // bounding box of the subaperture disc in pixel indices
    const double pitch = probe.pitch();
    const int i_lo = std::max(0, static_cast<int>((geom.cx[n] - half + 0.5 * extent) / pitch) - 1);
    const int i_hi = std::min(nx - 1, static_cast<int>((geom.cx[n] + half + 0.5 * extent) / pitch) + 1);
    for (int i = i_lo; i <= i_hi; ++i) {
      const double dx = probe.x(i) - geom.cx[n];
      for (int j = 0; j < ny; ++j) {
        const double dy = probe.y(j) - geom.cy[n];
        const double r_sq = dx * dx + dy * dy;
        if (r_sq > half_sq) continue;
        Pixel p;
        p.index_flat = i * ny + j;
        p.sub = n;
        p.amp = geom.amplitude * std::exp(-r_sq * inv_2a0sq);
        p.dx = dx;
        p.dy = dy;
        pixels_.push_back(p);
      }
    }
  }
}

ComplexField SourceFieldBuilder::build(const ControlVector& ctrl) const {
  ComplexField f(nx_, ny_, extent_);
  for (const auto& p : pixels_) {
    const double phi =
        ctrl.tip_x[p.sub] * p.dx + ctrl.tip_y[p.sub] * p.dy + ctrl.piston[p.sub];
    const double ph = k_ * phi;
    f.samples()[p.index_flat] += cplx(p.amp * std::cos(ph), p.amp * std::sin(ph));
  }
  return f;
}

ComplexField source_field(const ArrayGeometry& geom, const ControlVector& ctrl,
                          int nx, int ny, double extent, double wavenumber) {
  if (static_cast<int>(ctrl.piston.size()) != geom.n_sub())
    throw std::invalid_argument("source_field: control/geometry size mismatch");
  return SourceFieldBuilder(geom, nx, ny, extent, wavenumber).build(ctrl);
}

}  // namespace beamsim
