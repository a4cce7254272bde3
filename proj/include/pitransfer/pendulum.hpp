#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <utility>
#include <vector>

#include "pitransfer/dimension.hpp"
#include "pitransfer/errors.hpp"

namespace pitransfer {

/// Physical and episode parameters of the torque-limited simple pendulum.
/// Angle convention: theta = 0 upright, theta = +-pi hanging.
struct PendulumParams {
  double m = 1.0;        // mass [kg]
  double l = 2.0;        // rod length [m]
  double g = 10.0;       // gravitational acceleration [m/s^2]
  double tau_max = 8.0;  // torque saturation [N m]
  double dt = 0.05;      // control / integration step [s]
  double t_f = 10.0;     // episode duration [s]
  double w_theta = 1.0;  // position cost weight [1/s]
  double w_tau = 0.01;   // torque cost weight [1/(N^2 s)]

  void validate() const;

  /// Number of control steps in one episode.
  int episode_steps() const { return static_cast<int>(std::lround(t_f / dt)); }

  static PendulumParams from_context(const Context& ctx);
  Context to_context(std::string name = "pendulum") const;
};

struct PendulumState {
  double theta = 0.0;      // wrapped to [-pi, pi)
  double theta_dot = 0.0;  // [rad/s]
};

/// Standard evaluation start: hanging at rest, nudged off the exact antipode
/// so the angle wrap has a unique side.
inline PendulumState evaluation_start() {
  return {std::numbers::pi - 1e-9, 0.0};
}

/// Wraps an angle into [-pi, pi).
inline double wrap_angle(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(theta + std::numbers::pi, two_pi);
  if (w < 0.0) w += two_pi;
  return w - std::numbers::pi;
}

/// One control step: clamps tau to [-tau_max, tau_max], advances
///   theta_ddot = (g/l) sin(theta) + tau / (m l^2)
/// by dt with classical RK4 under zero-order-hold torque, then wraps theta.
inline PendulumState step(const PendulumParams& p, const PendulumState& s, double tau) {
  const double u = std::clamp(tau, -p.tau_max, p.tau_max);
  const double grav = p.g / p.l;
  const double drive = u / (p.m * p.l * p.l);
  auto accel = [&](double theta) { return grav * std::sin(theta) + drive; };

  const double dt = p.dt;
  const double k1_th = s.theta_dot;
  const double k1_td = accel(s.theta);
  const double k2_th = s.theta_dot + 0.5 * dt * k1_td;
  const double k2_td = accel(s.theta + 0.5 * dt * k1_th);
  const double k3_th = s.theta_dot + 0.5 * dt * k2_td;
  const double k3_td = accel(s.theta + 0.5 * dt * k2_th);
  const double k4_th = s.theta_dot + dt * k3_td;
  const double k4_td = accel(s.theta + dt * k3_th);

  PendulumState next;
  next.theta = wrap_angle(s.theta + dt / 6.0 * (k1_th + 2.0 * k2_th + 2.0 * k3_th + k4_th));
  next.theta_dot = s.theta_dot + dt / 6.0 * (k1_td + 2.0 * k2_td + 2.0 * k3_td + k4_td);
  return next;
}

/// -(w_theta theta^2 + w_tau tau^2), theta wrapped.
inline double instantaneous_reward(const PendulumParams& p, const PendulumState& s,
                                   double tau) {
  const double theta = wrap_angle(s.theta);
  return -(p.w_theta * theta * theta + p.w_tau * tau * tau);
}

/// Total mechanical energy; conserved by the free pendulum.
inline double mechanical_energy(const PendulumParams& p, const PendulumState& s) {
  return 0.5 * p.m * p.l * p.l * s.theta_dot * s.theta_dot +
         p.m * p.g * p.l * std::cos(s.theta);
}

/// One rollout: N = round(t_f/dt) control steps plus the final sample.
/// Sample k < N carries the torque applied over [t_k, t_k + dt) and the
/// reward integrand at (state_k, tau_k); the final sample records what the
/// policy would command there and is excluded from the total.
struct Trajectory {
  std::vector<double> time;
  std::vector<double> theta;
  std::vector<double> theta_dot;
  std::vector<double> tau;
  std::vector<double> reward;
  double total_reward = 0.0;

  std::size_t size() const { return time.size(); }
};

template <typename PolicyFn>
Trajectory rollout(const PendulumParams& params, PolicyFn&& policy,
                   PendulumState initial) {
  params.validate();
  const int n_steps = params.episode_steps();
  Trajectory traj;
  traj.time.reserve(n_steps + 1);
  traj.theta.reserve(n_steps + 1);
  traj.theta_dot.reserve(n_steps + 1);
  traj.tau.reserve(n_steps + 1);
  traj.reward.reserve(n_steps + 1);

  PendulumState s{wrap_angle(initial.theta), initial.theta_dot};
  double reward_sum = 0.0;
  for (int k = 0; k <= n_steps; ++k) {
    const double commanded = policy(s.theta, s.theta_dot);
    if (!std::isfinite(commanded)) {
      throw PolicyReturnedNonFinite("policy returned non-finite torque at t=" +
                                    std::to_string(k * params.dt));
    }
    const double applied = std::clamp(commanded, -params.tau_max, params.tau_max);
    const double r = instantaneous_reward(params, s, applied);
    traj.time.push_back(k * params.dt);
    traj.theta.push_back(s.theta);
    traj.theta_dot.push_back(s.theta_dot);
    traj.tau.push_back(applied);
    traj.reward.push_back(r);
    if (k < n_steps) {
      reward_sum += r;
      s = step(params, s, applied);
    }
  }
  traj.total_reward = reward_sum * params.dt;
  return traj;
}

/// CSV with header t,theta,theta_dot,tau,reward; 17 significant digits.
void export_trajectory_csv(const Trajectory& traj, std::ostream& out);
void export_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

}  // namespace pitransfer
