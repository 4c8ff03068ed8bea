#include "beamsim/zernike.hpp"

#include <cmath>
#include <stdexcept>

namespace beamsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

double radial_poly(int n, int m, double rho) {
  // R_n^m(rho) = sum_s (-1)^s (n-s)! / (s! ((n+m)/2-s)! ((n-m)/2-s)!) rho^(n-2s)
  auto fact = [](int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  double out = 0.0;
  for (int s = 0; s <= (n - m) / 2; ++s) {
    const double c = ((s % 2) ? -1.0 : 1.0) * fact(n - s) /
                     (fact(s) * fact((n + m) / 2 - s) * fact((n - m) / 2 - s));
    out += c * std::pow(rho, n - 2 * s);
  }
  return out;
}

}  // namespace

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration from the Chebyshev estimate on [-1, 1]
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[n - 1 - i] = 0.5 * (x + 1.0);
    weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

ZernikeBasis::ZernikeBasis(int max_degree, double aperture_radius)
    : max_degree_(max_degree), radius_(aperture_radius) {
  if (max_degree < 1) throw std::invalid_argument("ZernikeBasis: max degree must be >= 1");
  if (!(aperture_radius > 0.0))
    throw std::invalid_argument("ZernikeBasis: aperture radius must be > 0");
  // degree 1: x-slope (cos) first, then y-slope (sin)
  indices_.push_back({1, 1});
  indices_.push_back({1, -1});
  for (int n = 2; n <= max_degree; ++n)
    for (int m = -n; m <= n; m += 2) indices_.push_back({n, m});
}

double ZernikeBasis::eval(int q, double x, double y) const {
  const Index& id = indices_[q];
  const double rho = std::hypot(x, y) / radius_;
  const double theta = std::atan2(y, x);
  const int ma = std::abs(id.m);
  const double norm =
      (id.m == 0) ? std::sqrt(static_cast<double>(id.n + 1))
                  : std::sqrt(2.0 * (id.n + 1));
  double ang = 1.0;
  if (id.m > 0) ang = std::cos(ma * theta);
  if (id.m < 0) ang = std::sin(ma * theta);
  return norm * radial_poly(id.n, ma, rho) * ang;
}

std::vector<double> ZernikeBasis::gram() const {
  const int q_n = q_count();
  std::vector<double> g(static_cast<size_t>(q_n) * q_n, 0.0);
  std::vector<double> rn, rw;
  gauss_legendre_01(32, rn, rw);
  const int n_theta = 128;
  for (int a = 0; a < static_cast<int>(rn.size()); ++a) {
    const double r = rn[a] * radius_;
    for (int b = 0; b < n_theta; ++b) {
      const double th = 2.0 * kPi * (b + 0.5) / n_theta;
      const double x = r * std::cos(th), y = r * std::sin(th);
      // quadrature weight over the disc, normalized by pi R^2
      const double w = rw[a] * rn[a] * 2.0 / n_theta;
      for (int p = 0; p < q_n; ++p) {
        const double zp = eval(p, x, y);
        for (int q = p; q < q_n; ++q)
          g[static_cast<size_t>(p) * q_n + q] += w * zp * eval(q, x, y);
      }
    }
  }
  for (int p = 0; p < q_n; ++p)
    for (int q = 0; q < p; ++q)
      g[static_cast<size_t>(p) * q_n + q] = g[static_cast<size_t>(q) * q_n + p];
  return g;
}

RMatrix build_r_matrix(const ArrayGeometry& geom, const ZernikeBasis& basis,
                       ControlMode mode, int radial_nodes, int theta_nodes) {
  geom.validate();
  const double ap = basis.aperture_radius();
  for (int n = 0; n < geom.n_sub(); ++n)
    if (std::hypot(geom.cx[n], geom.cy[n]) + 0.5 * geom.d > ap * (1.0 + 1e-12))
      throw std::invalid_argument("build_r_matrix: subaperture outside the aperture disc");

  RMatrix rm;
  rm.n_sub = geom.n_sub();
  rm.mode = mode;
  rm.q_count = basis.q_count();
  rm.coef.assign(static_cast<size_t>(rm.k_count()) * rm.q_count, 0.0);

  std::vector<double> rn, rw;
  gauss_legendre_01(radial_nodes, rn, rw);
  const double half = 0.5 * geom.d;
  const double scale = 4.0 / (kPi * geom.d * geom.d);

  for (int s = 0; s < geom.n_sub(); ++s) {
    for (int a = 0; a < radial_nodes; ++a) {
      const double r = rn[a] * half;
      for (int b = 0; b < theta_nodes; ++b) {
        const double th = 2.0 * kPi * (b + 0.5) / theta_nodes;
        const double dx = r * std::cos(th), dy = r * std::sin(th);
        const double x = geom.cx[s] + dx, y = geom.cy[s] + dy;
        // area element: r dr dtheta with r = rn*half
        const double w = rw[a] * rn[a] * half * half * 2.0 * kPi / theta_nodes;
        for (int q = 0; q < rm.q_count; ++q) {
          const double z = basis.eval(q, x, y);
          rm.coef[static_cast<size_t>(s) * rm.q_count + q] += scale * w * z;
          if (mode == ControlMode::piston_tip_tilt) {
            rm.coef[static_cast<size_t>(rm.n_sub + s) * rm.q_count + q] +=
                scale * w * dx * z;
            rm.coef[static_cast<size_t>(2 * rm.n_sub + s) * rm.q_count + q] +=
                scale * w * dy * z;
          }
        }
      }
    }
  }
  return rm;
}

ControlVector zernike_to_controls(const std::vector<double>& u_z, const RMatrix& rm) {
  if (static_cast<int>(u_z.size()) != rm.q_count)
    throw std::invalid_argument("zernike_to_controls: coefficient length mismatch");
  std::vector<double> flat(rm.k_count(), 0.0);
  for (int k = 0; k < rm.k_count(); ++k) {
    double acc = 0.0;
    for (int q = 0; q < rm.q_count; ++q) acc += rm.at(k, q) * u_z[q];
    flat[k] = acc;
  }
  return ControlVector::from_flat(flat, rm.n_sub, rm.mode);
}

}  // namespace beamsim
