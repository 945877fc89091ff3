#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "omchaos/model.hpp"
#include "omchaos/steadystate.hpp"

namespace omchaos {

/// Effective 2D potential (units of hbar omega_m):
///   V(q, Q) = q^2/2 + (4 w_r / 2) Q^2
///             - (eta^2 / kappa) arctan((Delta + xi q - xi_sm Q) / kappa).
/// Harmonic confinement of both mirrors plus the radiation-pressure arctan
/// term; generally a double well in the bistable regime.
inline double potential_energy(double q, double Q,
                               const DimensionlessModel& m) {
  const double d = m.detuning + m.xi * q - m.xi_sm * Q;
  return 0.5 * q * q + 0.5 * m.four_wr() * Q * Q -
         m.pump_sq() / m.kappa * std::atan(d / m.kappa);
}

struct PotentialGradient {
  double dq = 0.0;
  double dQ = 0.0;
  double norm() const { return std::hypot(dq, dQ); }
};

/// Analytic gradient; the forces of the equations of motion are its negative:
///   -dV/dq = -q + xi n(q, Q),  -dV/dQ = -4 w_r Q - xi_sm n(q, Q).
inline PotentialGradient potential_gradient(double q, double Q,
                                            const DimensionlessModel& m) {
  const double n = intracavity_intensity(q, Q, m);
  return {q - m.xi * n, m.four_wr() * Q + m.xi_sm * n};
}

struct PotentialHessian {
  double qq = 0.0;
  double qQ = 0.0;
  double QQ = 0.0;

  std::array<double, 2> eigenvalues() const {
    const double mean = 0.5 * (qq + QQ);
    const double disc = std::hypot(0.5 * (qq - QQ), qQ);
    return {mean - disc, mean + disc};
  }
};

inline PotentialHessian potential_hessian(double q, double Q,
                                          const DimensionlessModel& m) {
  const FieldResponse f = field_response(q, Q, m);
  PotentialHessian h;
  h.qq = 1.0 - m.xi * m.xi * f.d_intensity;
  h.qQ = m.xi * m.xi_sm * f.d_intensity;
  h.QQ = m.four_wr() - m.xi_sm * m.xi_sm * f.d_intensity;
  return h;
}

enum class CriticalKind { minimum, saddle, maximum };

inline const char* to_string(CriticalKind k) {
  switch (k) {
    case CriticalKind::minimum: return "minimum";
    case CriticalKind::saddle: return "saddle";
    case CriticalKind::maximum: return "maximum";
  }
  return "?";
}

struct CriticalPoint {
  double q = 0.0;
  double Q = 0.0;
  double energy = 0.0;  // hbar omega_m
  CriticalKind kind = CriticalKind::minimum;
  std::array<double, 2> hessian_eigenvalues{};
};

struct SearchBox {
  double q_lo = 0.0, q_hi = 0.0;
  double Q_lo = 0.0, Q_hi = 0.0;

  bool contains(double q, double Q, double margin = 0.0) const {
    return q >= q_lo - margin && q <= q_hi + margin && Q >= Q_lo - margin &&
           Q <= Q_hi + margin;
  }
};

struct CriticalPointResult {
  std::vector<CriticalPoint> points;  // ascending in energy
  std::vector<std::string> warnings;
};

/// Box spanning the steady-state branch positions, padded by 50% per side;
/// the equilibria and the potential's critical points are the same
/// mathematics, so this always brackets them.
inline SearchBox default_search_box(const DimensionlessModel& m) {
  DimensionlessModel cons = m;
  cons.gamma_m = cons.gamma_sm = 0.0;
  const auto branches = solve_steady_states(cons, cons.pump_ratio());
  SearchBox box{0.0, 0.0, 0.0, 0.0};
  for (const auto& b : branches) {
    box.q_lo = std::min(box.q_lo, b.q_s);
    box.q_hi = std::max(box.q_hi, b.q_s);
    box.Q_lo = std::min(box.Q_lo, b.Q_s);
    box.Q_hi = std::max(box.Q_hi, b.Q_s);
  }
  const double q_pad = 0.5 * std::max(box.q_hi - box.q_lo, 1.0);
  const double Q_pad = 0.5 * std::max(box.Q_hi - box.Q_lo, 1.0);
  return {box.q_lo - q_pad, box.q_hi + q_pad, box.Q_lo - Q_pad,
          box.Q_hi + Q_pad};
}

namespace detail {

/// Damped Newton iteration on the gradient. Returns true on convergence to
/// gradient norm <= tol.
inline bool newton_critical_point(const DimensionlessModel& m, double& q,
                                  double& Q, double tol, int max_iter = 100) {
  PotentialGradient g = potential_gradient(q, Q, m);
  for (int it = 0; it < max_iter; ++it) {
    if (g.norm() <= tol) return true;
    const PotentialHessian h = potential_hessian(q, Q, m);
    const double det = h.qq * h.QQ - h.qQ * h.qQ;
    if (det == 0.0 || !std::isfinite(det)) return false;
    const double dq = (-g.dq * h.QQ + g.dQ * h.qQ) / det;
    const double dQ = (-h.qq * g.dQ + h.qQ * g.dq) / det;
    double step = 1.0;
    for (int halve = 0; halve < 40; ++halve) {
      const double q_new = q + step * dq;
      const double Q_new = Q + step * dQ;
      const PotentialGradient g_new = potential_gradient(q_new, Q_new, m);
      if (g_new.norm() < g.norm()) {
        q = q_new;
        Q = Q_new;
        g = g_new;
        break;
      }
      step *= 0.5;
      if (halve == 39) return false;
    }
  }
  return g.norm() <= tol;
}

}  // namespace detail

/// All critical points of V inside the box: seeds on a grid, damped Newton
/// on the gradient, duplicates within 1e-6 merged, Hessian classification,
/// sorted by energy. Grid cells whose corner gradients change sign in both
/// components but produced no converged point are reported as warnings.
inline CriticalPointResult find_critical_points(const DimensionlessModel& m,
                                                const SearchBox& box,
                                                int grid = 64) {
  if (!(box.q_hi > box.q_lo) || !(box.Q_hi > box.Q_lo) ||
      !std::isfinite(box.q_lo) || !std::isfinite(box.q_hi) ||
      !std::isfinite(box.Q_lo) || !std::isfinite(box.Q_hi)) {
    throw ConfigError("critical-point search box must be finite and non-empty");
  }
  if (grid < 2) throw ConfigError("critical-point seed grid must be >= 2");

  constexpr double grad_tol = 1e-12;
  constexpr double dedup_radius = 1e-6;

  CriticalPointResult result;
  std::vector<std::array<double, 2>> found;
  std::vector<bool> cell_converged(static_cast<std::size_t>(grid) * grid,
                                   false);

  const auto seed_coord = [&](int i, int j) {
    const double fq = (static_cast<double>(i) + 0.5) / grid;
    const double fQ = (static_cast<double>(j) + 0.5) / grid;
    return std::array<double, 2>{box.q_lo + fq * (box.q_hi - box.q_lo),
                                 box.Q_lo + fQ * (box.Q_hi - box.Q_lo)};
  };

  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      auto [q, Q] = seed_coord(i, j);
      if (!detail::newton_critical_point(m, q, Q, grad_tol)) continue;
      cell_converged[static_cast<std::size_t>(i) * grid + j] = true;
      if (!box.contains(q, Q, dedup_radius)) continue;
      bool duplicate = false;
      for (const auto& f : found) {
        if (std::hypot(q - f[0], Q - f[1]) < dedup_radius) {
          duplicate = true;
          break;
        }
      }
      if (duplicate) continue;
      found.push_back({q, Q});

      CriticalPoint cp;
      cp.q = q;
      cp.Q = Q;
      cp.energy = potential_energy(q, Q, m);
      cp.hessian_eigenvalues = potential_hessian(q, Q, m).eigenvalues();
      const auto [lo, hi] = cp.hessian_eigenvalues;
      if (lo > 0.0) cp.kind = CriticalKind::minimum;
      else if (hi < 0.0) cp.kind = CriticalKind::maximum;
      else cp.kind = CriticalKind::saddle;
      result.points.push_back(cp);
    }
  }

  // Flag suspicious cells: both gradient components change sign across the
  // cell corners yet no Newton run from the cell converged.
  for (int i = 0; i + 1 < grid && grid >= 2; ++i) {
    for (int j = 0; j + 1 < grid; ++j) {
      bool pos_q = false, neg_q = false, pos_Q = false, neg_Q = false;
      for (int di = 0; di <= 1; ++di) {
        for (int dj = 0; dj <= 1; ++dj) {
          auto [q, Q] = seed_coord(i + di, j + dj);
          const PotentialGradient g = potential_gradient(q, Q, m);
          (g.dq >= 0.0 ? pos_q : neg_q) = true;
          (g.dQ >= 0.0 ? pos_Q : neg_Q) = true;
        }
      }
      if (pos_q && neg_q && pos_Q && neg_Q &&
          !cell_converged[static_cast<std::size_t>(i) * grid + j]) {
        result.warnings.push_back(
            "no convergence from seed cell (" + std::to_string(i) + "," +
            std::to_string(j) + ") despite gradient sign change");
      }
    }
  }

  std::sort(result.points.begin(), result.points.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) {
              return a.energy < b.energy;
            });
  return result;
}

}  // namespace omchaos
