#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pitransfer/dimension.hpp"
#include "pitransfer/policy.hpp"

namespace pitransfer {

/// Dimensions of the policy's observation and action channels.
struct ChannelSpec {
  std::string name;
  Dimension dim;
};

struct ChannelSignature {
  std::vector<ChannelSpec> observations;
  std::vector<ChannelSpec> actions;
  /// Context entry bounding the action magnitude in each context
  /// ("tau_max" for the pendulum); empty disables the clamp.
  std::string action_limit_entry;

  /// Observations [theta: dimensionless, theta_dot: 1/T], action
  /// [tau: M L^2 / T^2], limited by tau_max.
  static ChannelSignature pendulum();
};

enum class TransferMode { naive, scaled };

/// Source policy as a callable over (theta, theta_dot), reporting whether the
/// underlying table clamped its input.
using SourceQueryFn = std::function<PolicyGrid::Query(double, double)>;

inline SourceQueryFn as_source(const PolicyGrid& policy) {
  return [&policy](double theta, double theta_dot) { return policy.query(theta, theta_dot); };
}

/// Wraps a plain callable; never reports input clamping.
inline SourceQueryFn as_source(std::function<double(double, double)> fn) {
  return [fn = std::move(fn)](double theta, double theta_dot) {
    return PolicyGrid::Query{fn(theta, theta_dot), false};
  };
}

/// A source policy adapted to a target context.
///
/// Scaled mode routes every channel through dimensionless space: target
/// observations are nondimensionalized with the target basis, mapped to
/// source units with the source basis, fed to the source policy, and the
/// action comes back through the inverse composition. Since each channel
/// transform is a pure scale factor, the composition collapses to one
/// precomputed factor per channel. Naive mode uses the source policy as is.
/// Both modes clamp the action to the target context's limit.
class TransferredPolicy {
 public:
  TransferredPolicy(SourceQueryFn source, Context source_context,
                    Context target_context, TransferMode mode, ChannelSignature sig);

  /// Adapted action with the target-context action clamp applied.
  PolicyGrid::Query query(double theta, double theta_dot) const;
  double operator()(double theta, double theta_dot) const {
    return query(theta, theta_dot).tau;
  }

  /// Adapted action before the target clamp (the source policy's own
  /// saturation still applies).
  PolicyGrid::Query query_unclamped(double theta, double theta_dot) const;

  TransferMode mode() const { return mode_; }
  const Context& source_context() const { return source_ctx_; }
  const Context& target_context() const { return target_ctx_; }
  const ChannelSignature& signature() const { return signature_; }

  /// Per-channel multipliers, exposed for verification: target observations
  /// are multiplied into source units; source actions into target units.
  const std::vector<double>& observation_factors() const { return obs_factors_; }
  const std::vector<double>& action_factors() const { return act_factors_; }
  double action_limit() const { return action_limit_; }

 private:
  SourceQueryFn source_fn_;
  Context source_ctx_;
  Context target_ctx_;
  TransferMode mode_;
  ChannelSignature signature_;
  std::vector<double> obs_factors_;
  std::vector<double> act_factors_;
  double action_limit_ = 0.0;
};

/// The original policy used as is in the target context.
TransferredPolicy naive_transfer(SourceQueryFn policy, const Context& source,
                                 const Context& target);
TransferredPolicy naive_transfer(const PolicyGrid& policy, const Context& source,
                                 const Context& target);

/// The original policy scaled through dimensionless space.
TransferredPolicy scaled_transfer(SourceQueryFn policy, const Context& source,
                                  const Context& target, ChannelSignature sig);
TransferredPolicy scaled_transfer(const PolicyGrid& policy, const Context& source,
                                  const Context& target,
                                  ChannelSignature sig = ChannelSignature::pendulum());

}  // namespace pitransfer
