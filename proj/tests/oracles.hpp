#pragma once

// Small independent reference computations. Nothing here calls into the
// library, so agreement with it means something.

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracle {

/// Root of f on [a, b], f(a) and f(b) of opposite sign.
inline double bisect(const std::function<double(double)>& f, double a, double b, double tol = 1e-15) {
  double fa = f(a);
  if (fa * f(b) > 0) throw std::invalid_argument("bisect: no sign change");
  for (int k = 0; k < 400 && b - a > tol; ++k) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

namespace detail {
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
  return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return detail::simpson(f, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), tol, 50);
}

/// Root s in (0, 1) of s = exp(r0 (s - 1 - i0)), the homogeneous final size
/// with S0 = 1 on a unit interval.
inline double homogeneous_final_size(double r0, double i0) {
  return bisect([&](double s) { return s - std::exp(r0 * (s - 1.0 - i0)); }, 1e-300, 1.0 / r0);
}

/// Homogeneous SIR on a unit interval: s' = -beta s i, i' = beta s i - mu i.
/// Classical RK4 with a fixed step; returns (s, i) at time t.
inline std::array<double, 2> homogeneous_sir(double beta, double mu, double s0, double i0, double t, double dt) {
  auto rhs = [&](double s, double i) { return std::array<double, 2>{-beta * s * i, beta * s * i - mu * i}; };
  double s = s0, i = i0;
  const long steps = std::lround(t / dt);
  for (long k = 0; k < steps; ++k) {
    const auto k1 = rhs(s, i);
    const auto k2 = rhs(s + 0.5 * dt * k1[0], i + 0.5 * dt * k1[1]);
    const auto k3 = rhs(s + 0.5 * dt * k2[0], i + 0.5 * dt * k2[1]);
    const auto k4 = rhs(s + dt * k3[0], i + dt * k3[1]);
    s += dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    i += dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
  }
  return {s, i};
}

/// Survivors of a separable epidemic with pre-vaccination v, from the
/// scalar relation x e^{-x} = sigma0 e^{-sigma0} eta solved by bisection.
/// Inputs are nodal values with quadrature weights w.
template <class Vec>
double separable_survivors(const Vec& r, const Vec& s0, const Vec& i0, const Vec& v, const Vec& w) {
  double sigma0 = 0, ri0 = 0, m = 0, pop = 0;
  for (int k = 0; k < static_cast<int>(w.size()); ++k) {
    sigma0 += w[k] * r[k] * (s0[k] - v[k]);
    ri0 += w[k] * r[k] * i0[k];
    m += w[k] * v[k];
    pop += w[k] * s0[k];
  }
  if (sigma0 <= 0) return pop;
  const double eta = std::exp(-ri0);
  const double target = sigma0 * std::exp(-sigma0) * eta;
  const double hi = std::min(sigma0, 1.0);
  const double sigma_inf = bisect([&](double x) { return x * std::exp(-x) - target; }, 0.0, hi);
  return m + (pop - m) * std::exp(sigma_inf - sigma0) * eta;
}

}  // namespace oracle
