#include "pitransfer/transfer.hpp"

#include <cmath>
#include <limits>

namespace pitransfer {
namespace {

void check_same_schema(const Context& source, const Context& target) {
  if (source.entries().size() != target.entries().size() ||
      source.basis_names() != target.basis_names()) {
    throw SchemaMismatch("source and target contexts have different schemas");
  }
  for (std::size_t i = 0; i < source.entries().size(); ++i) {
    if (source.entries()[i].name != target.entries()[i].name) {
      throw SchemaMismatch("source and target contexts have different schemas");
    }
  }
}

/// Scale of phi_beta for a channel of dimension d: phi(x) = x * factor.
double channel_scale(const Dimension& d, const Basis& basis) {
  const ExponentTriple exps = pi_exponents(d, basis);
  double factor = 1.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double e = exps[i];
    const double v = basis.member(i).value;
    if (e == 0.0) continue;
    if (e == 1.0) factor *= v;
    else if (e == -1.0) factor /= v;
    else factor *= std::pow(v, e);
  }
  return factor;
}

}  // namespace

ChannelSignature ChannelSignature::pendulum() {
  ChannelSignature sig;
  sig.observations = {{"theta", Dimension::dimensionless()},
                      {"theta_dot", Dimension{0, 0, -1}}};
  sig.actions = {{"tau", Dimension{1, 2, -2}}};
  sig.action_limit_entry = "tau_max";
  return sig;
}

TransferredPolicy::TransferredPolicy(SourceQueryFn source, Context source_context,
                                     Context target_context, TransferMode mode,
                                     ChannelSignature sig)
    : source_fn_(std::move(source)), source_ctx_(std::move(source_context)),
      target_ctx_(std::move(target_context)), mode_(mode),
      signature_(std::move(sig)) {
  if (!source_fn_) throw InvalidConfig("transferred policy needs a source callable");
  check_same_schema(source_ctx_, target_ctx_);

  if (signature_.observations.size() != 2 || signature_.actions.size() != 1) {
    throw SchemaMismatch(
        "expected a (theta, theta_dot) -> tau signature with 2 observation "
        "channels and 1 action channel");
  }
  obs_factors_.assign(signature_.observations.size(), 1.0);
  act_factors_.assign(signature_.actions.size(), 1.0);
  if (mode_ == TransferMode::scaled) {
    const Basis source_basis = source_ctx_.basis();
    const Basis target_basis = target_ctx_.basis();
    // x_source = phi_{b_source}^{-1}(phi_{b_target}(x_target)); the two
    // scale factors compose into their ratio. Equal contexts divide the
    // same number by itself, so identity is exact.
    for (std::size_t c = 0; c < obs_factors_.size(); ++c) {
      const Dimension& d = signature_.observations[c].dim;
      obs_factors_[c] = channel_scale(d, target_basis) / channel_scale(d, source_basis);
    }
    for (std::size_t c = 0; c < act_factors_.size(); ++c) {
      const Dimension& d = signature_.actions[c].dim;
      act_factors_[c] = channel_scale(d, source_basis) / channel_scale(d, target_basis);
    }
  }
  if (signature_.action_limit_entry.empty()) {
    action_limit_ = std::numeric_limits<double>::infinity();
  } else {
    action_limit_ = target_ctx_.value(signature_.action_limit_entry);
    if (!(action_limit_ > 0.0)) {
      throw InvalidConfig("action limit entry '" + signature_.action_limit_entry +
                          "' must be strictly positive in the target context");
    }
  }
}

PolicyGrid::Query TransferredPolicy::query_unclamped(double theta,
                                                     double theta_dot) const {
  PolicyGrid::Query q =
      source_fn_(theta * obs_factors_[0], theta_dot * obs_factors_[1]);
  q.tau *= act_factors_[0];
  return q;
}

PolicyGrid::Query TransferredPolicy::query(double theta, double theta_dot) const {
  PolicyGrid::Query q = query_unclamped(theta, theta_dot);
  q.tau = std::clamp(q.tau, -action_limit_, action_limit_);
  return q;
}

TransferredPolicy naive_transfer(SourceQueryFn policy, const Context& source,
                                 const Context& target) {
  return TransferredPolicy(std::move(policy), source, target, TransferMode::naive,
                           ChannelSignature::pendulum());
}

TransferredPolicy naive_transfer(const PolicyGrid& policy, const Context& source,
                                 const Context& target) {
  return naive_transfer(as_source(policy), source, target);
}

TransferredPolicy scaled_transfer(SourceQueryFn policy, const Context& source,
                                  const Context& target, ChannelSignature sig) {
  return TransferredPolicy(std::move(policy), source, target, TransferMode::scaled,
                           std::move(sig));
}

TransferredPolicy scaled_transfer(const PolicyGrid& policy, const Context& source,
                                  const Context& target, ChannelSignature sig) {
  return scaled_transfer(as_source(policy), source, target, std::move(sig));
}

}  // namespace pitransfer
