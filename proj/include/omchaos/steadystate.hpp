#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "omchaos/cubic.hpp"
#include "omchaos/errors.hpp"
#include "omchaos/model.hpp"

namespace omchaos {

/// Adiabatic intracavity field at mirror positions (q, Q).
struct FieldResponse {
  double detune = 0.0;       // kappa-scaled working detuning Delta + xi q - xi_sm Q
  double intensity = 0.0;    // photon number n(q, Q)
  double d_intensity = 0.0;  // dn/d(detune)
};

inline FieldResponse field_response(double q, double Q,
                                    const DimensionlessModel& m) {
  FieldResponse f;
  f.detune = m.detuning + m.xi * q - m.xi_sm * Q;
  const double denom = m.kappa * m.kappa + f.detune * f.detune;
  f.intensity = m.pump_sq() / denom;
  f.d_intensity = -2.0 * f.detune * f.intensity / denom;
  return f;
}

/// Steady-state photon number with both mirrors clamped at (q, Q).
/// Total function, bounded by eta^2 / kappa^2.
inline double intracavity_intensity(double q, double Q,
                                    const DimensionlessModel& m) {
  return field_response(q, Q, m).intensity;
}

enum class StabilityClass { stable, unstable, marginal };

inline const char* to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::stable: return "stable";
    case StabilityClass::unstable: return "unstable";
    case StabilityClass::marginal: return "marginal";
  }
  return "?";
}

/// One self-consistent field/mirror equilibrium.
struct SteadyStateBranch {
  double photon_number = 0.0;  // n_s = |alpha_s|^2
  double q_s = 0.0;
  double Q_s = 0.0;
  bool stable = false;  // not linearly unstable (attracting or center)
  bool fold = false;    // degenerate double root: branch merging point
  std::array<std::complex<double>, 4> eigenvalues{};
  StabilityClass classification = StabilityClass::marginal;
};

namespace detail {

/// Jacobian of the damped first-order flow
///   q' = p
///   p' = -q + xi n - gamma_m p
///   Q' = 4 w_r P - gamma_sm Q
///   P' = -4 w_r Q - xi_sm n - gamma_sm P
/// at position (q, Q); n depends on positions only. State order (q, p, Q, P).
inline Eigen::Matrix4d flow_jacobian(const DimensionlessModel& m, double q,
                                     double Q) {
  const FieldResponse f = field_response(q, Q, m);
  const double nq = m.xi * f.d_intensity;      // dn/dq
  const double nQ = -m.xi_sm * f.d_intensity;  // dn/dQ
  const double w = m.four_wr();
  Eigen::Matrix4d j;
  j << 0.0, 1.0, 0.0, 0.0,
      -1.0 + m.xi * nq, -m.gamma_m, m.xi * nQ, 0.0,
      0.0, 0.0, -m.gamma_sm, w,
      -m.xi_sm * nq, 0.0, -w - m.xi_sm * nQ, -m.gamma_sm;
  return j;
}

struct EigenDecomposition {
  std::array<std::complex<double>, 4> values{};
  Eigen::Matrix4cd vectors;
};

inline EigenDecomposition eigen_decompose(const Eigen::Matrix4d& j) {
  Eigen::EigenSolver<Eigen::Matrix4d> solver(j);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigenvalue solver failed on flow Jacobian");
  }
  EigenDecomposition d;
  for (int i = 0; i < 4; ++i) d.values[i] = solver.eigenvalues()(i);
  d.vectors = solver.eigenvectors();
  return d;
}

inline StabilityClass classify(const std::array<std::complex<double>, 4>& ev) {
  constexpr double tol = 1e-12;
  bool any_positive = false;
  bool all_negative = true;
  for (const auto& v : ev) {
    if (v.real() > tol) any_positive = true;
    if (!(v.real() < -tol)) all_negative = false;
  }
  if (any_positive) return StabilityClass::unstable;
  if (all_negative) return StabilityClass::stable;
  return StabilityClass::marginal;
}

}  // namespace detail

/// All field equilibria at the given normalized pump intensity
/// eta^2/kappa^2, ascending in photon number. The photon numbers are the
/// real non-negative roots of
///   R(n) = n (kappa^2 + (Delta + K n)^2) - eta^2
/// with K the Kerr coefficient; roots from the closed-form cubic are
/// polished by Newton to |R| <= 1e-12 eta^2. Exact double roots are returned
/// once, flagged as folds.
inline std::vector<SteadyStateBranch> solve_steady_states(
    const DimensionlessModel& model, double pump_ratio) {
  if (pump_ratio < 0.0 || !std::isfinite(pump_ratio)) {
    throw ConfigError("pump ratio must be non-negative and finite");
  }
  const DimensionlessModel m = with_pump_ratio(model, pump_ratio);
  const double eta2 = m.pump_sq();
  const double kerr = m.kerr_coefficient();
  const double kappa2 = m.kappa * m.kappa;

  const auto residual = [&](double n) {
    const double d = m.detuning + kerr * n;
    return n * (kappa2 + d * d) - eta2;
  };
  const auto d_residual = [&](double n) {
    const double d = m.detuning + kerr * n;
    return kappa2 + d * d + 2.0 * kerr * n * d;
  };

  std::vector<double> roots =
      real_cubic_roots(kerr * kerr, 2.0 * kerr * m.detuning,
                       kappa2 + m.detuning * m.detuning, -eta2);
  if (eta2 == 0.0) {
    roots = {0.0};  // undriven cavity: the only equilibrium is dark
  }

  const double tol = std::max(1e-12 * eta2, 1e-300);
  for (double& r : roots) r = polish_root(residual, d_residual, r, tol);

  // Drop negatives (roundoff can push the dark root slightly below zero),
  // merge double roots, and verify the polish met tolerance.
  std::sort(roots.begin(), roots.end());
  const double span = std::max(eta2 / kappa2, 1e-300);
  std::vector<SteadyStateBranch> branches;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    double n = roots[i];
    if (n < -1e-12 * span) continue;
    n = std::max(n, 0.0);
    const bool duplicate =
        !branches.empty() &&
        std::abs(n - branches.back().photon_number) <= 1e-9 * span;
    if (duplicate) {
      branches.back().fold = true;
      continue;
    }
    if (std::abs(residual(n)) > 1e3 * tol) {
      throw NumericalError(
          "steady-state root failed to reach residual tolerance at n=" +
          std::to_string(n));
    }
    SteadyStateBranch b;
    b.photon_number = n;
    b.q_s = m.xi * n;
    b.Q_s = -m.xi_sm * n / (m.four_wr() * m.sidemode_response_factor());
    const auto eig = detail::eigen_decompose(
        detail::flow_jacobian(m, b.q_s, b.Q_s));
    b.eigenvalues = eig.values;
    b.classification = detail::classify(b.eigenvalues);
    b.stable = b.classification != StabilityClass::unstable;
    branches.push_back(b);
  }
  return branches;
}

struct SweepPoint {
  double pump_ratio = 0.0;
  std::vector<SteadyStateBranch> branches;
};

struct BistabilitySweep {
  std::vector<SweepPoint> points;
  /// Pump ratios where the root count changes, located by bisection to
  /// relative width 1e-6, ascending.
  std::vector<double> fold_pump_ratios;
};

/// Branch structure across a pump-intensity range (the bistability diagram).
inline BistabilitySweep sweep_bistability(const DimensionlessModel& model,
                                          double ratio_lo, double ratio_hi,
                                          int n_points) {
  if (!(ratio_lo >= 0.0) || !(ratio_hi >= ratio_lo)) {
    throw ConfigError("bistability sweep range must satisfy 0 <= lo <= hi");
  }
  if (n_points < 2) throw ConfigError("bistability sweep needs >= 2 points");

  BistabilitySweep sweep;
  sweep.points.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double r =
        ratio_lo + (ratio_hi - ratio_lo) * static_cast<double>(i) /
                       static_cast<double>(n_points - 1);
    sweep.points.push_back({r, solve_steady_states(model, r)});
  }

  const auto count_at = [&](double r) {
    return solve_steady_states(model, r).size();
  };
  for (std::size_t i = 0; i + 1 < sweep.points.size(); ++i) {
    double lo = sweep.points[i].pump_ratio;
    double hi = sweep.points[i + 1].pump_ratio;
    std::size_t c_lo = sweep.points[i].branches.size();
    std::size_t c_hi = sweep.points[i + 1].branches.size();
    if (c_lo == c_hi) continue;
    while (hi - lo > 1e-6 * std::max(1.0, hi)) {
      const double mid = 0.5 * (lo + hi);
      if (count_at(mid) == c_lo) lo = mid;
      else hi = mid;
    }
    sweep.fold_pump_ratios.push_back(0.5 * (lo + hi));
  }
  return sweep;
}

}  // namespace omchaos
