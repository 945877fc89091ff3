#pragma once

#include <boost/numeric/odeint.hpp>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "omchaos/errors.hpp"
#include "omchaos/model.hpp"
#include "omchaos/potential.hpp"
#include "omchaos/steadystate.hpp"

namespace omchaos {

/// Phase-space point (q, p, Q, P) at scaled time tau = omega_m t.
struct State {
  double q = 0.0;
  double p = 0.0;
  double Q = 0.0;
  double P = 0.0;
  double tau = 0.0;

  bool finite() const {
    return std::isfinite(q) && std::isfinite(p) && std::isfinite(Q) &&
           std::isfinite(P) && std::isfinite(tau);
  }
};

/// Total energy p^2/2 + (4 w_r / 2) P^2 + V(q, Q), units of hbar omega_m.
inline double total_energy(const State& s, const DimensionlessModel& m) {
  return 0.5 * s.p * s.p + 0.5 * m.four_wr() * s.P * s.P +
         potential_energy(s.q, s.Q, m);
}

struct IntegratorInfo {
  std::string name;
  double dt = 0.0;       // fixed step (leapfrog) or initial step (adaptive)
  double rel_tol = 0.0;  // adaptive only
  double abs_tol = 0.0;  // adaptive only
};

/// Short text identifying the model constants a trajectory was computed
/// with; embedded in outputs so data can never be mismatched to a model.
inline std::string model_fingerprint(const DimensionlessModel& m) {
  const auto fmt = [](double v) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
  };
  return "kappa=" + fmt(m.kappa) + ";detuning=" + fmt(m.detuning) +
         ";xi=" + fmt(m.xi) + ";xi_sm=" + fmt(m.xi_sm) +
         ";recoil=" + fmt(m.recoil) + ";pump=" + fmt(m.pump) +
         ";gamma_m=" + fmt(m.gamma_m) + ";gamma_sm=" + fmt(m.gamma_sm);
}

struct Trajectory {
  std::vector<State> states;  // uniform sampling interval dtau_out
  double dtau_out = 0.0;
  std::string fingerprint;
  IntegratorInfo integrator;
};

struct EnergyReport {
  double initial_energy = 0.0;
  double max_relative_drift = 0.0;
  std::vector<double> drift_series;  // per output sample
};

/// One velocity-Verlet step of the conservative flow. Works on velocity
/// variables v_q = p and v_Q = 4 w_r P so both degrees of freedom share the
/// kick-drift-kick form; momenta are reconstructed exactly on output.
class LeapfrogStepper {
 public:
  LeapfrogStepper(const DimensionlessModel& m, double dt)
      : model_(m), four_wr_(m.four_wr()), dt_(dt) {
    if (!(dt > 0.0)) throw ConfigError("leapfrog step must be positive");
  }

  void reset(const State& s) {
    q_ = s.q;
    vq_ = s.p;
    Q_ = s.Q;
    vQ_ = four_wr_ * s.P;
    tau_ = s.tau;
    refresh_accel();
  }

  void step() {
    vq_ += 0.5 * dt_ * aq_;
    vQ_ += 0.5 * dt_ * aQ_;
    q_ += dt_ * vq_;
    Q_ += dt_ * vQ_;
    refresh_accel();
    vq_ += 0.5 * dt_ * aq_;
    vQ_ += 0.5 * dt_ * aQ_;
    tau_ += dt_;
  }

  State state() const { return {q_, vq_, Q_, vQ_ / four_wr_, tau_}; }

  /// Overrides the internally accumulated time (used to pin output samples
  /// to an exact uniform grid).
  State state_at(double tau) const { return {q_, vq_, Q_, vQ_ / four_wr_, tau}; }

  double dt() const { return dt_; }
  const DimensionlessModel& model() const { return model_; }

 private:
  void refresh_accel() {
    const double n = intracavity_intensity(q_, Q_, model_);
    aq_ = -q_ + model_.xi * n;
    aQ_ = -four_wr_ * four_wr_ * Q_ - four_wr_ * model_.xi_sm * n;
  }

  DimensionlessModel model_;
  double four_wr_;
  double dt_;
  double q_ = 0.0, vq_ = 0.0, Q_ = 0.0, vQ_ = 0.0;
  double tau_ = 0.0;
  double aq_ = 0.0, aQ_ = 0.0;
};

namespace detail {

inline std::int64_t steps_per_sample(double dt, double dtau_out) {
  const double ratio = dtau_out / dt;
  const auto k = static_cast<std::int64_t>(std::llround(ratio));
  if (k < 1 || std::abs(ratio - static_cast<double>(k)) > 1e-9 * ratio) {
    throw ConfigError("output interval must be an integer multiple of dt");
  }
  return k;
}

inline std::int64_t sample_count(double tau_end, double dtau_out) {
  if (!(tau_end > 0.0)) throw ConfigError("tau_end must be positive");
  return static_cast<std::int64_t>(std::llround(tau_end / dtau_out));
}

[[noreturn]] inline void throw_diverged(const State& last_good) {
  throw NumericalError(
      "integration diverged to non-finite state; last good state tau=" +
      std::to_string(last_good.tau) + " q=" + std::to_string(last_good.q) +
      " p=" + std::to_string(last_good.p) + " Q=" + std::to_string(last_good.Q) +
      " P=" + std::to_string(last_good.P));
}

}  // namespace detail

/// Streams the conservative leapfrog flow through `sink(state)` at uniform
/// intervals dtau_out (the initial state included). Memory use is O(1), so
/// section and exponent computations can run arbitrarily long.
inline void integrate_conservative_stream(
    const State& initial, const DimensionlessModel& model, double tau_end,
    double dt, double dtau_out, const std::function<void(const State&)>& sink) {
  const std::int64_t k = detail::steps_per_sample(dt, dtau_out);
  const std::int64_t n_samples = detail::sample_count(tau_end, dtau_out);
  if (!initial.finite()) throw ConfigError("initial state must be finite");

  LeapfrogStepper stepper(model, dt);
  stepper.reset(initial);
  State last_good = initial;
  sink(initial);
  for (std::int64_t i = 1; i <= n_samples; ++i) {
    for (std::int64_t s = 0; s < k; ++s) stepper.step();
    const State sample =
        stepper.state_at(initial.tau + static_cast<double>(i) * dtau_out);
    if (!sample.finite()) detail::throw_diverged(last_good);
    last_good = sample;
    sink(sample);
  }
}

/// Conservative (symplectic) integration with an attached energy-drift
/// report. Second order: halving dt cuts the drift bound by ~4.
inline std::pair<Trajectory, EnergyReport> integrate_conservative(
    const State& initial, const DimensionlessModel& model, double tau_end,
    double dt = 1e-3, double dtau_out = 0.01) {
  Trajectory traj;
  traj.dtau_out = dtau_out;
  traj.fingerprint = model_fingerprint(model);
  traj.integrator = {"leapfrog", dt, 0.0, 0.0};
  traj.states.reserve(
      static_cast<std::size_t>(detail::sample_count(tau_end, dtau_out)) + 1);

  EnergyReport report;
  report.initial_energy = total_energy(initial, model);
  const double denom =
      report.initial_energy != 0.0 ? std::abs(report.initial_energy) : 1.0;

  integrate_conservative_stream(
      initial, model, tau_end, dt, dtau_out, [&](const State& s) {
        traj.states.push_back(s);
        const double drift =
            std::abs(total_energy(s, model) - report.initial_energy) / denom;
        report.drift_series.push_back(drift);
        report.max_relative_drift = std::max(report.max_relative_drift, drift);
      });
  return {std::move(traj), std::move(report)};
}

struct AdaptiveTolerances {
  double rel = 1e-9;
  double abs = 1e-12;
};

/// Damped equations of motion (the conservative flow plus decay terms).
/// The side-mode damping is not frictional: it acts on both Q and P.
inline std::array<double, 4> damped_rhs(const std::array<double, 4>& x,
                                        const DimensionlessModel& m) {
  const double n = intracavity_intensity(x[0], x[2], m);
  const double w = m.four_wr();
  return {x[1],
          -x[0] + m.xi * n - m.gamma_m * x[1],
          w * x[3] - m.gamma_sm * x[2],
          -w * x[2] - m.xi_sm * n - m.gamma_sm * x[3]};
}

/// Adaptive Dormand-Prince 5(4) integration of the damped flow with dense
/// output resampled at dtau_out. With both dampings zero this reproduces the
/// conservative flow and serves as the cross-check reference for the
/// leapfrog integrator.
inline Trajectory integrate_damped(const State& initial,
                                   const DimensionlessModel& model,
                                   double tau_end,
                                   AdaptiveTolerances tol = {},
                                   double dtau_out = 0.01) {
  namespace ode = boost::numeric::odeint;
  using StateVec = std::array<double, 4>;

  if (!initial.finite()) throw ConfigError("initial state must be finite");
  const std::int64_t n_samples = detail::sample_count(tau_end, dtau_out);

  Trajectory traj;
  traj.dtau_out = dtau_out;
  traj.fingerprint = model_fingerprint(model);
  traj.integrator = {"dopri5", 1e-3, tol.rel, tol.abs};
  traj.states.reserve(static_cast<std::size_t>(n_samples) + 1);

  auto stepper = ode::make_dense_output(
      tol.abs, tol.rel, ode::runge_kutta_dopri5<StateVec>());
  const auto rhs = [&](const StateVec& x, StateVec& dxdt, double) {
    dxdt = damped_rhs(x, model);
  };

  StateVec x{initial.q, initial.p, initial.Q, initial.P};
  stepper.initialize(x, initial.tau, 1e-3);

  State last_good = initial;
  traj.states.push_back(initial);
  std::int64_t next = 1;
  try {
    while (next <= n_samples) {
      stepper.do_step(rhs);
      while (next <= n_samples) {
        const double t_next =
            initial.tau + static_cast<double>(next) * dtau_out;
        if (t_next > stepper.current_time()) break;
        StateVec xi;
        stepper.calc_state(t_next, xi);
        const State sample{xi[0], xi[1], xi[2], xi[3], t_next};
        if (!sample.finite()) detail::throw_diverged(last_good);
        last_good = sample;
        traj.states.push_back(sample);
        ++next;
      }
      if (!std::isfinite(stepper.current_time())) {
        detail::throw_diverged(last_good);
      }
    }
  } catch (const std::overflow_error& e) {
    throw NumericalError(std::string("adaptive step-size underflow: ") +
                         e.what());
  }
  return traj;
}

}  // namespace omchaos
