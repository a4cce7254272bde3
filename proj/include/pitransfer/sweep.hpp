#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <limits>
#include <string>
#include <vector>

#include "pitransfer/dimension.hpp"
#include "pitransfer/policy.hpp"
#include "pitransfer/transfer.hpp"

namespace pitransfer {

/// One sweep axis: multiplicative factors applied to a context quantity.
/// Similar axes go through the similarity transform (and must name basis
/// members); non-similar axes override the raw value afterwards.
struct SweepAxis {
  std::string quantity;
  std::vector<double> factors;
  bool similar = true;
};

enum class OracleMode { none, per_context_dp };

struct SweepSpec {
  std::string name = "sweep";
  std::vector<SweepAxis> axes;
  OracleMode oracle = OracleMode::none;
  GridSpec synthesis;    // per-context oracle synthesis resolution
  std::uint64_t seed = 0;

  void validate() const;
};

/// Sweep spec files are JSON documents mirroring SweepSpec:
///   {"schema": 1, "name": ..., "axes": [{"quantity": "m", "factors": [...],
///    "similar": true}, ...], "oracle": "none"|"per_context_dp",
///    "synthesis": {...}, "seed": 0}
SweepSpec load_sweep_spec(const std::filesystem::path& path);
SweepSpec sweep_spec_from_json(const nlohmann::ordered_json& doc);
nlohmann::ordered_json sweep_spec_to_json(const SweepSpec& spec);

/// Cartesian product of the axis factors, row-major over axes as listed
/// (first axis slowest). Similar factors propagate through
/// generate_similar_context; non-similar factors override raw values.
std::vector<Context> build_grid(const Context& original, const SweepSpec& spec);

/// Per-context evaluation record.
struct TransferReportRow {
  Context context;
  double distance = 0.0;
  double naive_reward = 0.0;
  double scaled_reward = 0.0;
  double naive_clamp_frac = 0.0;
  double scaled_clamp_frac = 0.0;
  /// Optimal policy's own rollout reward; NaN without an oracle.
  double oracle_reward = std::numeric_limits<double>::quiet_NaN();
  /// Fraction of optimal performance (1 = optimal); NaN without an oracle.
  double naive_relative = std::numeric_limits<double>::quiet_NaN();
  double scaled_relative = std::numeric_limits<double>::quiet_NaN();
  bool fingerprint_matched = false;
  std::string warning;
  std::string error;  // non-empty when this context failed to evaluate
};

using TransferReport = std::vector<TransferReportRow>;

struct EvaluateOptions {
  OracleMode oracle = OracleMode::none;
  GridSpec oracle_synthesis;
  int threads = 0;
};

/// Rolls out the naive and scaled adapters of source_policy in every context
/// from the standard start state; per-context failures are recorded in the
/// row, not thrown. With OracleMode::per_context_dp a fresh policy is
/// synthesized per context and its reward becomes the relative-reward
/// denominator.
TransferReport evaluate_transfers(const Context& original, const PolicyGrid& source_policy,
                                  const std::vector<Context>& contexts,
                                  const EvaluateOptions& options);

/// Ratio of optimal to tested total reward, oriented so 1 means optimal and
/// smaller means worse. Rewards here are nonpositive, so this is
/// |oracle| / |tested|; it can exceed 1 only by discretization slack.
double relative_reward(double oracle_reward, double tested_reward);

struct SweepSummary {
  std::size_t contexts = 0;
  std::size_t evaluated = 0;  // rows without errors
  std::size_t scaled_wins = 0;
  std::size_t naive_wins = 0;
  std::size_t ties = 0;
  double mean_naive_reward = 0.0;
  double mean_scaled_reward = 0.0;
  /// Contexts at distance < kSimilarDistanceTol from the original.
  std::size_t similar_contexts = 0;
  /// Of those, with an oracle: fraction at scaled relative reward >= 0.98.
  double similar_near_optimal_fraction = std::numeric_limits<double>::quiet_NaN();

  static constexpr double kTieTol = 1e-9;
  static constexpr double kSimilarDistanceTol = 1e-8;
};

SweepSummary summarize(const TransferReport& report);
nlohmann::ordered_json summary_to_json(const SweepSummary& summary);

/// CSV schema, one row per (context, mode):
///   m,l,g,tau_max,t_f,w_theta,w_tau,dt,distance,mode,total_reward,relative_reward,clamp_frac
/// Cross-context totals are comparable only within one context or between
/// similar contexts; rows carry the distance so consumers can tell.
void export_csv(const TransferReport& report, std::ostream& out);
void export_csv(const TransferReport& report, const std::filesystem::path& path);

/// Reads back a CSV produced by export_csv (context values, distance,
/// rewards; warnings and fingerprints are not round-tripped).
TransferReport import_csv(const std::filesystem::path& path);

enum class ReportMetric { total_reward, relative_reward, clamp_frac };

ReportMetric parse_metric(const std::string& name);

/// Self-contained SVG: log-log scatter of the metric over two context
/// quantities, one panel per mode, original context starred.
void export_svg_heatmap(const TransferReport& report, const std::string& x_axis,
                        const std::string& y_axis, ReportMetric metric,
                        const std::filesystem::path& path);

}  // namespace pitransfer
