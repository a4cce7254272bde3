#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "pitransfer/pendulum.hpp"

using namespace pitransfer;

namespace {

constexpr double kPi = std::numbers::pi;

/// Dimensionless-equivalent test controller: tau = m g l * f(theta, theta_dot
/// * sqrt(l/g)) with a fixed shape f, so similar contexts see the same
/// dimensionless feedback law.
auto shaped_policy(const PendulumParams& p) {
  const double torque_scale = p.m * p.g * p.l;
  const double rate_scale = std::sqrt(p.l / p.g);
  return [torque_scale, rate_scale](double theta, double theta_dot) {
    const double u = theta_dot * rate_scale;
    return torque_scale * (0.3 * std::sin(theta) - 0.1 * u + 0.2);
  };
}

}  // namespace

TEST_CASE("angle wrapping lands in [-pi, pi)") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(kPi) == doctest::Approx(-kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(-kPi));
  CHECK(wrap_angle(3.0 * kPi / 2.0) == doctest::Approx(-kPi / 2.0));
  CHECK(wrap_angle(2.0 * kPi + 1.0) == doctest::Approx(1.0));
  for (double t = -20.0; t <= 20.0; t += 0.37) {
    const double w = wrap_angle(t);
    CHECK(w >= -kPi);
    CHECK(w < kPi);
  }
}

TEST_CASE("upright equilibrium is a fixed point") {
  const PendulumParams p;
  const PendulumState next = step(p, {0.0, 0.0}, 0.0);
  CHECK(next.theta == 0.0);
  CHECK(next.theta_dot == 0.0);
}

TEST_CASE("hanging equilibrium is stable") {
  const PendulumParams p;
  const PendulumState next = step(p, {kPi - 1e-6, 0.0}, 0.0);
  CHECK(std::min(std::abs(next.theta - kPi), std::abs(next.theta + kPi)) < 1e-5);
}

TEST_CASE("free swing conserves mechanical energy") {
  PendulumParams p;
  p.w_theta = 0.0;
  p.w_tau = 0.0;
  const PendulumState start{3.0, 0.0};
  const double e0 = mechanical_energy(p, start);

  // coarse run at dt = 0.05
  PendulumState s = start;
  double worst_drift = 0.0;
  for (int k = 0; k < 1000; ++k) {
    s = step(p, s, 0.0);
    worst_drift = std::max(worst_drift,
                           std::abs(mechanical_energy(p, s) - e0) / std::abs(e0));
  }
  CHECK(worst_drift < 1e-6);

  // independent reference at dt/100
  PendulumParams fine = p;
  fine.dt = p.dt / 100.0;
  PendulumState r = start;
  for (int k = 0; k < 1000 * 100; ++k) r = step(fine, r, 0.0);
  const double e_ref = mechanical_energy(fine, r);
  CHECK(std::abs(e_ref - e0) / std::abs(e0) < 1e-10);
  CHECK(std::abs(mechanical_energy(p, s) - e_ref) / std::abs(e0) < 1e-6);
}

TEST_CASE("instantaneous reward") {
  const PendulumParams p;
  CHECK(instantaneous_reward(p, {0.0, 0.0}, 0.0) == 0.0);
  CHECK(instantaneous_reward(p, {1.0, 0.0}, 2.0) ==
        doctest::Approx(-1.04).epsilon(1e-14));
  // theta enters through its wrapped value
  CHECK(instantaneous_reward(p, {2.0 * kPi + 1.0, 0.0}, 2.0) ==
        doctest::Approx(-1.04).epsilon(1e-12));
  // odd symmetry of state and action leaves the cost unchanged
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double theta = angle(rng);
    const double theta_dot = angle(rng);
    const double tau = angle(rng);
    CHECK(instantaneous_reward(p, {theta, theta_dot}, tau) ==
          doctest::Approx(instantaneous_reward(p, {-theta, -theta_dot}, -tau))
              .epsilon(1e-12));
  }
}

TEST_CASE("rollout structure and totals") {
  const PendulumParams p;
  SUBCASE("zero policy from the upright fixed point scores zero") {
    const Trajectory traj = rollout(p, [](double, double) { return 0.0; }, {0.0, 0.0});
    CHECK(traj.size() == 201);
    CHECK(traj.total_reward == 0.0);
  }
  SUBCASE("constant full torque from hanging is strictly negative") {
    const Trajectory traj =
        rollout(p, [&](double, double) { return p.tau_max; }, evaluation_start());
    CHECK(traj.total_reward < 0.0);
  }
  SUBCASE("total equals the discretized reward integral") {
    const Trajectory traj = rollout(p, shaped_policy(p), evaluation_start());
    double sum = 0.0;
    for (int k = 0; k < p.episode_steps(); ++k) sum += traj.reward[k];
    CHECK(traj.total_reward == doctest::Approx(sum * p.dt).epsilon(1e-12));
  }
  SUBCASE("applied torque is saturated and recorded") {
    const Trajectory traj =
        rollout(p, [](double, double) { return 100.0; }, evaluation_start());
    for (double tau : traj.tau) CHECK(std::abs(tau) <= p.tau_max);
    CHECK(traj.tau[0] == p.tau_max);
  }
  SUBCASE("non-finite policy output is rejected") {
    CHECK_THROWS_AS(
        rollout(p, [](double, double) { return std::nan(""); }, evaluation_start()),
        PolicyReturnedNonFinite);
  }
}

TEST_CASE("identical inputs give bit-identical trajectories") {
  const PendulumParams p;
  const Trajectory a = rollout(p, shaped_policy(p), evaluation_start());
  const Trajectory b = rollout(p, shaped_policy(p), evaluation_start());
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a.theta[k] == b.theta[k]);
    CHECK(a.theta_dot[k] == b.theta_dot[k]);
    CHECK(a.tau[k] == b.tau[k]);
  }
  CHECK(a.total_reward == b.total_reward);
}

TEST_CASE("trajectories mirror under odd symmetry") {
  const PendulumParams p;
  auto base = shaped_policy(p);
  auto mirrored = [&](double theta, double theta_dot) {
    return -base(-theta, -theta_dot);
  };
  const Trajectory fwd = rollout(p, base, {2.0, 0.5});
  const Trajectory mir = rollout(p, mirrored, {-2.0, -0.5});
  for (std::size_t k = 0; k < fwd.size(); ++k) {
    CHECK(mir.theta[k] == doctest::Approx(-fwd.theta[k]).epsilon(1e-9));
    CHECK(mir.reward[k] == doctest::Approx(fwd.reward[k]).epsilon(1e-9));
  }
}

TEST_CASE("similar parameter sets produce the same dimensionless trajectory") {
  const PendulumParams p0;
  const Context c0 = p0.to_context();
  const std::pair<double, double> factor_pairs[] = {
      {2.0, 0.5}, {0.5, 2.0}, {0.1, 10.0}, {10.0, 1.0}, {1.0, 0.1}};
  for (const auto& [fm, fl] : factor_pairs) {
    CAPTURE(fm);
    CAPTURE(fl);
    const Context ct = generate_similar_context(
        c0, {{"m", fm * p0.m}, {"l", fl * p0.l}});
    const PendulumParams pt = PendulumParams::from_context(ct);
    REQUIRE(pt.episode_steps() == p0.episode_steps());

    const Trajectory t0 = rollout(p0, shaped_policy(p0), evaluation_start());
    const Trajectory tt = rollout(pt, shaped_policy(pt), evaluation_start());
    const double rate0 = std::sqrt(p0.l / p0.g);
    const double ratet = std::sqrt(pt.l / pt.g);
    for (std::size_t k = 0; k < t0.size(); ++k) {
      CHECK(std::abs(tt.theta[k] - t0.theta[k]) < 1e-9);
      CHECK(tt.theta_dot[k] * ratet ==
            doctest::Approx(t0.theta_dot[k] * rate0).epsilon(1e-9));
    }
    CHECK(tt.total_reward == doctest::Approx(t0.total_reward).epsilon(1e-9));
  }
}

TEST_CASE("params/context conversion") {
  const PendulumParams p;
  const Context ctx = p.to_context("conv");
  const PendulumParams back = PendulumParams::from_context(ctx);
  CHECK(back.m == p.m);
  CHECK(back.dt == p.dt);
  CHECK(back.w_tau == p.w_tau);

  SUBCASE("invalid parameters are rejected") {
    PendulumParams bad = p;
    bad.m = -1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidConfig);
    bad = p;
    bad.w_theta = -0.5;
    CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  }
  SUBCASE("foreign schemas are rejected") {
    const Context foreign("foreign",
                          {Quantity("m", 1.0, {1, 0, 0}), Quantity("l", 2.0, {0, 1, 0}),
                           Quantity("g", 10.0, {0, 1, -2})},
                          {"m", "l", "g"});
    CHECK_THROWS_AS(PendulumParams::from_context(foreign), SchemaMismatch);
  }
}

TEST_CASE("trajectory csv export") {
  const PendulumParams p;
  const Trajectory traj = rollout(p, shaped_policy(p), evaluation_start());
  std::ostringstream out;
  export_trajectory_csv(traj, out);
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "t,theta,theta_dot,tau,reward");
  std::size_t rows = 0;
  std::string first_row;
  while (std::getline(in, line)) {
    if (rows == 0) first_row = line;
    ++rows;
  }
  CHECK(rows == traj.size());
  // 17 significant digits round-trip the stored doubles exactly
  const std::string theta_field = first_row.substr(first_row.find(',') + 1);
  CHECK(std::stod(theta_field) == traj.theta[0]);
}
