#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "omchaos/constants.hpp"

namespace omchaos {

/// Real roots of a x^3 + b x^2 + c x + d, ascending. Degenerate leading
/// coefficients fall back to the quadratic / linear case. A triple or double
/// root is returned once per distinct value (multiplicity is not expanded).
inline std::vector<double> real_cubic_roots(double a, double b, double c,
                                            double d) {
  std::vector<double> roots;

  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (scale == 0.0) return roots;
  if (std::abs(a) < 1e-14 * scale) {
    // quadratic b x^2 + c x + d
    if (std::abs(b) < 1e-14 * scale) {
      if (c != 0.0) roots.push_back(-d / c);
      return roots;
    }
    const double disc = c * c - 4.0 * b * d;
    if (disc < 0.0) return roots;
    const double s = std::sqrt(disc);
    // Citardauq form for the smaller-magnitude root avoids cancellation.
    const double q = -0.5 * (c + std::copysign(s, c));
    roots.push_back(q / b);
    if (q != 0.0) roots.push_back(d / q);
    else roots.push_back(q / b);
    std::sort(roots.begin(), roots.end());
    return roots;
  }

  // Monic form x^3 + p x^2 + q x + r, then the standard trig/Cardano split.
  const double p = b / a;
  const double q = c / a;
  const double r = d / a;
  const double p2 = p * p;
  const double big_q = (p2 - 3.0 * q) / 9.0;
  const double big_r = (p * (2.0 * p2 - 9.0 * q) + 27.0 * r) / 54.0;
  const double r2 = big_r * big_r;
  const double q3 = big_q * big_q * big_q;

  if (r2 < q3) {
    // three real roots
    double t = big_r / std::sqrt(q3);
    t = std::clamp(t, -1.0, 1.0);
    t = std::acos(t);
    const double shift = p / 3.0;
    const double amp = -2.0 * std::sqrt(big_q);
    roots.push_back(amp * std::cos(t / 3.0) - shift);
    roots.push_back(amp * std::cos((t + 2.0 * constants::pi) / 3.0) - shift);
    roots.push_back(amp * std::cos((t - 2.0 * constants::pi) / 3.0) - shift);
  } else {
    const double u3 = -big_r - std::copysign(std::sqrt(r2 - q3), big_r);
    const double u = std::cbrt(u3);
    const double v = (u == 0.0) ? 0.0 : big_q / u;
    roots.push_back(u + v - p / 3.0);
    // the conjugate pair is real only when it degenerates to a double root
    const double imag = 0.5 * std::sqrt(3.0) * std::abs(u - v);
    if (imag < 1e-12 * (std::abs(u) + std::abs(v) + 1e-300)) {
      roots.push_back(-0.5 * (u + v) - p / 3.0);
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

/// Newton polish of a root of f. Steps are halved when the residual fails to
/// decrease; gives up (returning the best point seen) after max_iter.
inline double polish_root(const std::function<double(double)>& f,
                          const std::function<double(double)>& df, double x0,
                          double residual_tol, int max_iter = 60) {
  double x = x0;
  double fx = f(x);
  for (int it = 0; it < max_iter && std::abs(fx) > residual_tol; ++it) {
    const double d = df(x);
    if (d == 0.0 || !std::isfinite(d)) break;
    double step = fx / d;
    double x_new = x - step;
    double f_new = f(x_new);
    int halvings = 0;
    while (std::abs(f_new) > std::abs(fx) && halvings++ < 30) {
      step *= 0.5;
      x_new = x - step;
      f_new = f(x_new);
    }
    if (std::abs(f_new) >= std::abs(fx)) break;
    x = x_new;
    fx = f_new;
  }
  return x;
}

}  // namespace omchaos
