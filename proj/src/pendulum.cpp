#include "pitransfer/pendulum.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

namespace pitransfer {
namespace {

struct EntrySpec {
  const char* name;
  Dimension dim;
};

// Context schema of the pendulum, in canonical order. dt is part of the
// context: similarity requires a fixed dimensionless time step.
constexpr EntrySpec kSchema[] = {
    {"m", {1, 0, 0}},        {"g", {0, 1, -2}},      {"l", {0, 1, 0}},
    {"tau_max", {1, 2, -2}}, {"t_f", {0, 0, 1}},     {"w_theta", {0, 0, -1}},
    {"w_tau", {-2, -4, 3}},  {"dt", {0, 0, 1}},
};

}  // namespace

void PendulumParams::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidConfig(std::string(what) + " must be strictly positive and finite");
    }
  };
  positive(m, "m");
  positive(l, "l");
  positive(g, "g");
  positive(tau_max, "tau_max");
  positive(dt, "dt");
  positive(t_f, "t_f");
  if (!(w_theta >= 0.0) || !std::isfinite(w_theta)) {
    throw InvalidConfig("w_theta must be nonnegative and finite");
  }
  if (!(w_tau >= 0.0) || !std::isfinite(w_tau)) {
    throw InvalidConfig("w_tau must be nonnegative and finite");
  }
  if (episode_steps() < 1) {
    throw InvalidConfig("episode must contain at least one control step");
  }
}

PendulumParams PendulumParams::from_context(const Context& ctx) {
  if (ctx.entries().size() != std::size(kSchema)) {
    throw SchemaMismatch("context '" + ctx.name() + "' does not match the pendulum schema");
  }
  for (const EntrySpec& spec : kSchema) {
    if (!ctx.has(spec.name)) {
      throw SchemaMismatch("context '" + ctx.name() + "' is missing entry '" +
                           spec.name + "'");
    }
    if (ctx.at(spec.name).dim != spec.dim) {
      throw SchemaMismatch("context entry '" + std::string(spec.name) +
                           "' has an unexpected dimension");
    }
  }
  PendulumParams p;
  p.m = ctx.value("m");
  p.g = ctx.value("g");
  p.l = ctx.value("l");
  p.tau_max = ctx.value("tau_max");
  p.t_f = ctx.value("t_f");
  p.w_theta = ctx.value("w_theta");
  p.w_tau = ctx.value("w_tau");
  p.dt = ctx.value("dt");
  p.validate();
  return p;
}

Context PendulumParams::to_context(std::string name) const {
  validate();
  const double values[] = {m, g, l, tau_max, t_f, w_theta, w_tau, dt};
  std::vector<Quantity> entries;
  entries.reserve(std::size(kSchema));
  for (std::size_t i = 0; i < std::size(kSchema); ++i) {
    entries.emplace_back(kSchema[i].name, values[i], kSchema[i].dim);
  }
  return Context(std::move(name), std::move(entries), {"m", "l", "g"});
}

void export_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "t,theta,theta_dot,tau,reward\n";
  char line[256];
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g\n", traj.time[k],
                  traj.theta[k], traj.theta_dot[k], traj.tau[k], traj.reward[k]);
    out << line;
  }
}

void export_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open trajectory file for writing: " + path.string());
  export_trajectory_csv(traj, out);
  if (!out) throw IoError("failed writing trajectory file: " + path.string());
}

}  // namespace pitransfer
