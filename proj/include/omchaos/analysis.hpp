#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "omchaos/dynamics.hpp"
#include "omchaos/fft.hpp"
#include "omchaos/model.hpp"
#include "omchaos/potential.hpp"
#include "omchaos/rng.hpp"
#include "omchaos/steadystate.hpp"

namespace omchaos {

/// Draws a state of exact total energy E: (q, Q) rejection-sampled uniformly
/// over the box restricted to V <= E, kinetic energy split by a uniform
/// fraction u between the two degrees of freedom, momentum signs random.
inline State sample_energy_shell(const DimensionlessModel& m, double energy,
                                 Rng& rng, const SearchBox& box) {
  constexpr int max_rejections = 1000000;
  double q = 0.0, Q = 0.0, v = 0.0;
  bool accepted = false;
  for (int i = 0; i < max_rejections; ++i) {
    q = rng.uniform(box.q_lo, box.q_hi);
    Q = rng.uniform(box.Q_lo, box.Q_hi);
    v = potential_energy(q, Q, m);
    if (v <= energy) {
      accepted = true;
      break;
    }
  }
  if (!accepted) {
    throw NumericalError(
        "energy shell is empty: no point with V <= E found in the box");
  }
  const double kinetic = energy - v;
  const double u = rng.uniform();
  State s;
  s.q = q;
  s.Q = Q;
  s.p = rng.sign() * std::sqrt(2.0 * u * kinetic);
  s.P = rng.sign() * std::sqrt(2.0 * (1.0 - u) * kinetic / m.four_wr());
  s.tau = 0.0;
  return s;
}

inline State sample_energy_shell(const DimensionlessModel& m, double energy,
                                 std::uint64_t seed, const SearchBox& box) {
  Rng rng(seed);
  return sample_energy_shell(m, energy, rng, box);
}

/// Crossings of the plane Q = section_Q with P > 0, per trajectory.
struct PoincareSection {
  double section_Q = 0.0;
  double energy = 0.0;
  std::vector<std::vector<std::array<double, 2>>> crossings;  // (q, p)
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> warnings;  // aborted trajectories etc.
};

struct PoincareOptions {
  int n_trajectories = 24;
  double tau_end = 5000.0;
  double dt = 1e-3;
  double dtau_out = 0.01;  // bounds missed double-crossings (4 w_r < 1)
};

namespace detail {

/// One RK4 step of the flow rewritten with Q as the independent variable
/// (the exchange-of-variable trick): integrates the remaining coordinates
/// over exactly delta_Q. Valid away from P = 0.
inline void henon_step(const DimensionlessModel& m, double delta_Q, double& q,
                       double& p, double& Q, double& P, double& tau) {
  const double w = m.four_wr();
  const auto deriv = [&](const std::array<double, 4>& y, double Qc) {
    // y = (q, p, P, tau)
    const double inv = 1.0 / (w * y[2]);
    const double n = intracavity_intensity(y[0], Qc, m);
    return std::array<double, 4>{y[1] * inv, (-y[0] + m.xi * n) * inv,
                                 (-w * Qc - m.xi_sm * n) * inv, inv};
  };
  const std::array<double, 4> y0{q, p, P, tau};
  const double h = delta_Q;
  const auto k1 = deriv(y0, Q);
  std::array<double, 4> y1;
  for (int i = 0; i < 4; ++i) y1[i] = y0[i] + 0.5 * h * k1[i];
  const auto k2 = deriv(y1, Q + 0.5 * h);
  for (int i = 0; i < 4; ++i) y1[i] = y0[i] + 0.5 * h * k2[i];
  const auto k3 = deriv(y1, Q + 0.5 * h);
  for (int i = 0; i < 4; ++i) y1[i] = y0[i] + h * k3[i];
  const auto k4 = deriv(y1, Q + h);
  for (int i = 0; i < 4; ++i) {
    y1[i] = y0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  q = y1[0];
  p = y1[1];
  P = y1[2];
  tau = y1[3];
  Q += h;
}

/// Refines a bracketing sample to the section plane, |Q - section_Q| <= tol.
/// Returns false if the crossing is tangential (P ~ 0) and cannot be refined.
inline bool refine_crossing(const DimensionlessModel& m, State s,
                            double section_Q, double tol, State& out) {
  for (int it = 0; it < 8; ++it) {
    if (std::abs(s.Q - section_Q) <= tol) {
      out = s;
      return s.P > 0.0;
    }
    if (std::abs(s.P) < 1e-12) return false;
    henon_step(m, section_Q - s.Q, s.q, s.p, s.Q, s.P, s.tau);
    if (!s.finite()) return false;
  }
  return false;
}

}  // namespace detail

/// Section plane constant: the side-mode coordinate of the lowest potential
/// minimum (recomputed per model, never hard-coded).
inline double section_plane(const DimensionlessModel& m) {
  const auto result = find_critical_points(m, default_search_box(m));
  for (const auto& cp : result.points) {
    if (cp.kind == CriticalKind::minimum) return cp.Q;  // sorted by energy
  }
  throw NumericalError("no potential minimum found; cannot place section plane");
}

/// Poincare section at Q = section_plane(model), P > 0, from n seeded
/// energy-shell trajectories. Crossings are detected by sign change between
/// output samples and refined to |Q - Q_section| <= 1e-9. A diverging
/// trajectory aborts only itself and is recorded as a warning.
inline PoincareSection poincare_section(const DimensionlessModel& m, double energy,
                                        std::uint64_t seed, const SearchBox& box,
                                        const PoincareOptions& opt = {}) {
  PoincareSection section;
  section.section_Q = section_plane(m);
  section.energy = energy;
  section.crossings.resize(opt.n_trajectories);
  section.seeds.resize(opt.n_trajectories);

  for (int t = 0; t < opt.n_trajectories; ++t) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(t));
    section.seeds[t] = seed;
    const State start = sample_energy_shell(m, energy, rng, box);
    auto& list = section.crossings[t];
    State prev = start;
    bool have_prev = false;
    try {
      integrate_conservative_stream(
          start, m, opt.tau_end, opt.dt, opt.dtau_out, [&](const State& s) {
            if (have_prev && prev.Q < section.section_Q &&
                s.Q >= section.section_Q) {
              State refined;
              if (detail::refine_crossing(m, prev, section.section_Q, 1e-9,
                                          refined)) {
                list.push_back({refined.q, refined.p});
              }
            }
            prev = s;
            have_prev = true;
          });
    } catch (const NumericalError& e) {
      section.warnings.push_back("trajectory " + std::to_string(t) +
                                 " aborted: " + e.what());
    }
  }
  return section;
}

/// Number of distinct cells of an nx-by-ny grid over `box` touched by the
/// points. Regular section curves touch O(perimeter) cells; chaotic seas
/// fill an area.
inline std::size_t grid_occupancy(const std::vector<std::array<double, 2>>& points,
                                  const SearchBox& box, int nx, int ny) {
  if (nx < 1 || ny < 1) throw ConfigError("occupancy grid must be >= 1x1");
  std::set<std::pair<int, int>> cells;
  const double wx = box.q_hi - box.q_lo;
  const double wy = box.Q_hi - box.Q_lo;
  for (const auto& pt : points) {
    if (pt[0] < box.q_lo || pt[0] > box.q_hi || pt[1] < box.Q_lo ||
        pt[1] > box.Q_hi) {
      continue;
    }
    const int i = std::min(nx - 1, static_cast<int>((pt[0] - box.q_lo) / wx * nx));
    const int j = std::min(ny - 1, static_cast<int>((pt[1] - box.Q_lo) / wy * ny));
    cells.insert({i, j});
  }
  return cells.size();
}

enum class SpectrumWindow { hann, rect };

/// One-sided periodogram. The frequency grid is angular, in units of
/// omega_m, starting at zero; normalization is Parseval-consistent:
/// sum(psd) * dfreq equals the signal variance (exactly for rect).
struct PowerSpectrum {
  std::vector<double> frequency;  // omega in units of omega_m
  std::vector<double> psd;
  SpectrumWindow window = SpectrumWindow::hann;
  std::size_t record_length = 0;  // samples actually used (power of two)
};

enum class TrajectoryComponent { q, Q };

inline PowerSpectrum power_spectrum(const Trajectory& traj,
                                    TrajectoryComponent component,
                                    SpectrumWindow window) {
  constexpr std::size_t min_samples = 1u << 14;
  if (traj.states.size() < min_samples) {
    throw ConfigError("power spectrum needs at least 16384 samples");
  }
  if (!(traj.dtau_out > 0.0)) {
    throw ConfigError("trajectory must carry a positive sampling interval");
  }
  std::size_t n = 1;
  while (n * 2 <= traj.states.size()) n *= 2;

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const State& s = traj.states[i];
    x[i] = component == TrajectoryComponent::q ? s.q : s.Q;
  }
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);

  std::vector<std::complex<double>> a(n);
  double window_power = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = 1.0;
    if (window == SpectrumWindow::hann) {
      w = 0.5 * (1.0 - std::cos(2.0 * constants::pi * static_cast<double>(i) /
                                static_cast<double>(n)));
    }
    window_power += w * w;
    a[i] = (x[i] - mean) * w;
  }
  window_power /= static_cast<double>(n);
  detail::fft_radix2(a);

  const double dtau = traj.dtau_out;
  const double scale =
      dtau / (2.0 * constants::pi * static_cast<double>(n) * window_power);
  const double dfreq = 2.0 * constants::pi / (static_cast<double>(n) * dtau);

  PowerSpectrum spec;
  spec.window = window;
  spec.record_length = n;
  spec.frequency.resize(n / 2 + 1);
  spec.psd.resize(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    spec.frequency[k] = dfreq * static_cast<double>(k);
    const double one_sided = (k == 0 || k == n / 2) ? 1.0 : 2.0;
    spec.psd[k] = one_sided * std::norm(a[k]) * scale;
  }
  return spec;
}

/// Geometric mean over arithmetic mean of the positive-frequency bins
/// (DC excluded). Near zero for line spectra, larger for broadband ones;
/// invariant under amplitude scaling of the input signal.
inline double spectral_flatness(const PowerSpectrum& spec) {
  double log_sum = 0.0;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 1; k < spec.psd.size(); ++k) {
    const double v = std::max(spec.psd[k], 1e-300);
    log_sum += std::log(v);
    sum += v;
    ++count;
  }
  if (count == 0 || sum <= 0.0) return 0.0;
  return std::exp(log_sum / static_cast<double>(count)) /
         (sum / static_cast<double>(count));
}

/// Local maxima at least `ratio` times the median positive-frequency bin.
inline int count_spectral_peaks(const PowerSpectrum& spec, double ratio = 100.0) {
  if (spec.psd.size() < 4) return 0;
  std::vector<double> sorted(spec.psd.begin() + 1, spec.psd.end());
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                   sorted.end());
  const double median = sorted[sorted.size() / 2];
  const double floor = median * ratio;
  int peaks = 0;
  for (std::size_t k = 1; k + 1 < spec.psd.size(); ++k) {
    if (spec.psd[k] >= floor && spec.psd[k] > spec.psd[k - 1] &&
        spec.psd[k] >= spec.psd[k + 1]) {
      ++peaks;
    }
  }
  return peaks;
}

/// Linearization of the damped flow around a field/mirror equilibrium.
struct StabilityReport {
  State fixed_point;  // (q_s, 0, Q_s, P_s), tau = 0
  std::array<std::complex<double>, 4> eigenvalues{};
  StabilityClass classification = StabilityClass::marginal;
};

/// Analytic Jacobian eigenvalues at the branch fixed point. With zero
/// damping the spectrum comes in +/- pairs: minima give pure imaginary
/// eigenvalues (centers, classified marginal), saddles a real unstable pair.
inline StabilityReport linearize_fixed_point(const SteadyStateBranch& branch,
                                             const DimensionlessModel& m) {
  StabilityReport report;
  report.fixed_point = {branch.q_s, 0.0, branch.Q_s,
                        m.gamma_sm * branch.Q_s / m.four_wr(), 0.0};

  const std::array<double, 4> x{report.fixed_point.q, report.fixed_point.p,
                                report.fixed_point.Q, report.fixed_point.P};
  const auto rhs = damped_rhs(x, m);
  double residual = 0.0;
  for (double v : rhs) residual = std::max(residual, std::abs(v));
  if (residual > 1e-8 * std::max(1.0, std::abs(branch.photon_number))) {
    throw ConfigError("branch does not satisfy the fixed-point residual");
  }

  const auto eig = detail::eigen_decompose(
      detail::flow_jacobian(m, branch.q_s, branch.Q_s));
  report.eigenvalues = eig.values;
  report.classification = detail::classify(report.eigenvalues);
  return report;
}

struct LyapunovOptions {
  double renorm_interval = 1.0;
  double dt = 1e-3;
  double offset = 1e-8;
};

/// Largest Lyapunov exponent by the two-trajectory (Benettin) method:
/// a shadow trajectory offset by `offset` is renormalized back to that
/// distance every interval; the exponent is the mean log-stretch rate over
/// the second half of the run (the first half is discarded as transient).
inline double lyapunov_largest(const DimensionlessModel& m, const State& initial,
                               double tau_end, const LyapunovOptions& opt = {}) {
  if (!m.conservative()) {
    throw ConfigError("Lyapunov estimation expects a conservative model");
  }
  if (!(opt.renorm_interval > 0.0) || !(tau_end > opt.renorm_interval)) {
    throw ConfigError("invalid Lyapunov run lengths");
  }
  const auto steps =
      detail::steps_per_sample(opt.dt, opt.renorm_interval);
  const auto n_intervals =
      static_cast<std::int64_t>(std::llround(tau_end / opt.renorm_interval));

  LeapfrogStepper main(m, opt.dt);
  LeapfrogStepper shadow(m, opt.dt);
  main.reset(initial);
  State shifted = initial;
  const double h = opt.offset / 2.0;
  shifted.q += h;
  shifted.p += h;
  shifted.Q += h;
  shifted.P += h;
  shadow.reset(shifted);

  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(n_intervals));
  for (std::int64_t i = 0; i < n_intervals; ++i) {
    for (std::int64_t s = 0; s < steps; ++s) {
      main.step();
      shadow.step();
    }
    const State a = main.state();
    State b = shadow.state();
    if (!a.finite() || !b.finite()) {
      throw NumericalError("Lyapunov shadow diverged to non-finite state");
    }
    const double dq = b.q - a.q, dp = b.p - a.p;
    const double dQ = b.Q - a.Q, dP = b.P - a.P;
    const double dist = std::sqrt(dq * dq + dp * dp + dQ * dQ + dP * dP);
    logs.push_back(std::log(dist / opt.offset));
    const double rescale = opt.offset / dist;
    b.q = a.q + dq * rescale;
    b.p = a.p + dp * rescale;
    b.Q = a.Q + dQ * rescale;
    b.P = a.P + dP * rescale;
    b.tau = a.tau;
    shadow.reset(b);
  }

  double sum = 0.0;
  const std::size_t half = logs.size() / 2;
  for (std::size_t i = half; i < logs.size(); ++i) sum += logs[i];
  const double span =
      static_cast<double>(logs.size() - half) * opt.renorm_interval;
  return sum / span;
}

}  // namespace omchaos
