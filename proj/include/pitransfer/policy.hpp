#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pitransfer/pendulum.hpp"

namespace pitransfer {

/// Hyperparameters of lookup-table synthesis by discounted value iteration.
struct GridSpec {
  int n_theta = 301;
  int n_theta_dot = 301;
  /// theta_dot axis bound, in units of sqrt(g/l); converted per context so
  /// grids across contexts cover equivalent state regions.
  double theta_dot_max_dimensionless = 5.0;
  int n_actions = 21;  // odd, so tau = 0 is representable
  double gamma = 0.995;
  double tolerance = 1e-6;
  int max_sweeps = 5000;
  int threads = 0;  // 0 = available parallelism

  void validate() const;
};

/// Uniform axes over the cylinder [-pi, pi) x [-theta_dot_max, theta_dot_max].
/// theta nodes are cell-centered, theta_k = -pi + (k + 1/2) * 2pi / n, which
/// keeps the node set symmetric about 0 (and containing 0 for odd n); the
/// theta_dot axis includes its endpoints.
struct GridAxes {
  int n_theta = 0;
  int n_theta_dot = 0;
  double theta_dot_max = 0.0;

  double theta_spacing() const { return 2.0 * std::numbers::pi / n_theta; }
  double theta_node(int i) const {
    return -std::numbers::pi + (i + 0.5) * theta_spacing();
  }
  double theta_dot_spacing() const {
    return 2.0 * theta_dot_max / (n_theta_dot - 1);
  }
  double theta_dot_node(int j) const {
    return -theta_dot_max + j * theta_dot_spacing();
  }
  std::size_t cells() const {
    return static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_theta_dot);
  }
};

/// Torque lookup table over the (theta, theta_dot) grid with bilinear
/// interpolation: periodic in theta, clamped in theta_dot, output clamped to
/// [-tau_max, tau_max]. Immutable after construction.
class PolicyGrid {
 public:
  struct Query {
    double tau = 0.0;
    bool input_clamped = false;  // theta_dot fell outside the table range
  };

  PolicyGrid(GridAxes axes, double tau_max, std::vector<double> table,
             std::uint64_t fingerprint);

  Query query(double theta, double theta_dot) const;
  double operator()(double theta, double theta_dot) const {
    return query(theta, theta_dot).tau;
  }

  const GridAxes& axes() const { return axes_; }
  double tau_max() const { return tau_max_; }
  const std::vector<double>& table() const { return table_; }
  double cell(int i_theta, int j_theta_dot) const {
    return table_[static_cast<std::size_t>(i_theta) * axes_.n_theta_dot + j_theta_dot];
  }
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  GridAxes axes_;
  double tau_max_ = 0.0;
  std::vector<double> table_;
  std::uint64_t fingerprint_ = 0;
};

/// Converged state values on the same axes as the policy table.
class ValueGrid {
 public:
  ValueGrid(GridAxes axes, double tau_max, std::vector<double> values,
            std::uint64_t fingerprint);

  /// Bilinear interpolation, periodic in theta, clamped in theta_dot.
  double interpolate(double theta, double theta_dot) const;

  const GridAxes& axes() const { return axes_; }
  double tau_max() const { return tau_max_; }
  const std::vector<double>& values() const { return values_; }
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  GridAxes axes_;
  double tau_max_ = 0.0;
  std::vector<double> values_;
  std::uint64_t fingerprint_ = 0;
};

struct SynthesisResult {
  PolicyGrid policy;
  ValueGrid value;
  int sweeps = 0;
  double final_residual = 0.0;
  std::vector<double> residual_history;
};

/// Synthesizes the optimal lookup-table policy for one context by value
/// iteration with bilinearly interpolated successor values (Jacobi sweeps,
/// two alternating buffers). Argmax ties break toward the smallest |tau|,
/// then toward negative tau. Throws NoConvergence if the residual never
/// drops below spec.tolerance.
SynthesisResult value_iteration(const PendulumParams& params, const GridSpec& spec);

/// Convenience: the policy's torque lookup as a rollout callable.
inline auto policy_callable(const PolicyGrid& policy) {
  return [&policy](double theta, double theta_dot) { return policy(theta, theta_dot); };
}

/// Binary policy file, little-endian:
///   magic "PIPOLICY", u32 version = 1,
///   u32 n_theta, u32 n_theta_dot,
///   f64 theta_lo, theta_hi, theta_dot_lo, theta_dot_hi, tau_max,
///   f64 table[n_theta * n_theta_dot] (theta-major rows),
///   u64 fingerprint.
void save_policy(const PolicyGrid& policy, const std::filesystem::path& path);
PolicyGrid load_policy(const std::filesystem::path& path);

/// Same container with magic "PIVALGRD" for the value function.
void save_value(const ValueGrid& value, const std::filesystem::path& path);
ValueGrid load_value(const std::filesystem::path& path);

}  // namespace pitransfer
