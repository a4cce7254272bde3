#include "pitransfer/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "pitransfer/svg.hpp"

namespace pitransfer {

using nlohmann::ordered_json;

namespace {

constexpr int kSweepSchemaVersion = 1;
constexpr char kCsvHeader[] =
    "m,l,g,tau_max,t_f,w_theta,w_tau,dt,distance,mode,total_reward,"
    "relative_reward,clamp_frac";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

GridSpec grid_spec_from_json(const ordered_json& body) {
  GridSpec spec;
  if (body.contains("n_theta")) spec.n_theta = body["n_theta"].get<int>();
  if (body.contains("n_theta_dot")) spec.n_theta_dot = body["n_theta_dot"].get<int>();
  if (body.contains("theta_dot_max_dimensionless")) {
    spec.theta_dot_max_dimensionless = body["theta_dot_max_dimensionless"].get<double>();
  }
  if (body.contains("n_actions")) spec.n_actions = body["n_actions"].get<int>();
  if (body.contains("gamma")) spec.gamma = body["gamma"].get<double>();
  if (body.contains("tolerance")) spec.tolerance = body["tolerance"].get<double>();
  if (body.contains("max_sweeps")) spec.max_sweeps = body["max_sweeps"].get<int>();
  return spec;
}

ordered_json grid_spec_to_json(const GridSpec& spec) {
  return ordered_json{{"n_theta", spec.n_theta},
                      {"n_theta_dot", spec.n_theta_dot},
                      {"theta_dot_max_dimensionless", spec.theta_dot_max_dimensionless},
                      {"n_actions", spec.n_actions},
                      {"gamma", spec.gamma},
                      {"tolerance", spec.tolerance},
                      {"max_sweeps", spec.max_sweeps}};
}

double metric_value(const TransferReportRow& row, ReportMetric metric,
                    TransferMode mode) {
  const bool naive = mode == TransferMode::naive;
  switch (metric) {
    case ReportMetric::total_reward:
      return naive ? row.naive_reward : row.scaled_reward;
    case ReportMetric::relative_reward:
      return naive ? row.naive_relative : row.scaled_relative;
    case ReportMetric::clamp_frac:
      return naive ? row.naive_clamp_frac : row.scaled_clamp_frac;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

const char* metric_name(ReportMetric metric) {
  switch (metric) {
    case ReportMetric::total_reward: return "total_reward";
    case ReportMetric::relative_reward: return "relative_reward";
    case ReportMetric::clamp_frac: return "clamp_frac";
  }
  return "?";
}

}  // namespace

void SweepSpec::validate() const {
  if (axes.empty()) throw InvalidConfig("sweep spec needs at least one axis");
  for (const SweepAxis& axis : axes) {
    if (axis.quantity.empty()) throw InvalidConfig("sweep axis without a quantity name");
    if (axis.factors.empty()) {
      throw InvalidConfig("sweep axis '" + axis.quantity + "' has no factors");
    }
    for (double f : axis.factors) {
      if (!(f > 0.0) || !std::isfinite(f)) {
        throw InvalidConfig("sweep axis '" + axis.quantity +
                            "' has a non-positive factor");
      }
    }
  }
  synthesis.validate();
}

SweepSpec sweep_spec_from_json(const ordered_json& doc) {
  try {
    if (!doc.is_object()) throw InvalidConfig("sweep spec document is not an object");
    const int schema = doc.at("schema").get<int>();
    if (schema != kSweepSchemaVersion) {
      throw FormatVersionMismatch("unsupported sweep spec schema version " +
                                  std::to_string(schema));
    }
    SweepSpec spec;
    if (doc.contains("name")) spec.name = doc["name"].get<std::string>();
    for (const auto& axis : doc.at("axes")) {
      SweepAxis a;
      a.quantity = axis.at("quantity").get<std::string>();
      a.factors = axis.at("factors").get<std::vector<double>>();
      if (axis.contains("similar")) a.similar = axis["similar"].get<bool>();
      spec.axes.push_back(std::move(a));
    }
    if (doc.contains("oracle")) {
      const std::string oracle = doc["oracle"].get<std::string>();
      if (oracle == "none") {
        spec.oracle = OracleMode::none;
      } else if (oracle == "per_context_dp") {
        spec.oracle = OracleMode::per_context_dp;
      } else {
        throw InvalidConfig("unknown oracle mode '" + oracle + "'");
      }
    }
    if (doc.contains("synthesis")) spec.synthesis = grid_spec_from_json(doc["synthesis"]);
    if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();
    spec.validate();
    return spec;
  } catch (const ordered_json::exception& e) {
    throw InvalidConfig(std::string("malformed sweep spec: ") + e.what());
  }
}

ordered_json sweep_spec_to_json(const SweepSpec& spec) {
  ordered_json axes = ordered_json::array();
  for (const SweepAxis& a : spec.axes) {
    axes.push_back(ordered_json{
        {"quantity", a.quantity}, {"factors", a.factors}, {"similar", a.similar}});
  }
  return ordered_json{
      {"schema", kSweepSchemaVersion},
      {"name", spec.name},
      {"axes", std::move(axes)},
      {"oracle", spec.oracle == OracleMode::none ? "none" : "per_context_dp"},
      {"synthesis", grid_spec_to_json(spec.synthesis)},
      {"seed", spec.seed},
  };
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sweep spec: " + path.string());
  ordered_json doc;
  try {
    in >> doc;
  } catch (const ordered_json::exception& e) {
    throw InvalidConfig("cannot parse sweep spec " + path.string() + ": " + e.what());
  }
  return sweep_spec_from_json(doc);
}

std::vector<Context> build_grid(const Context& original, const SweepSpec& spec) {
  spec.validate();
  for (const SweepAxis& axis : spec.axes) {
    if (!original.has(axis.quantity)) {
      throw InvalidConfig("sweep axis '" + axis.quantity + "' is not a context entry");
    }
    const bool is_basis = original.is_basis_member(axis.quantity);
    if (axis.similar && !is_basis) {
      throw InvalidConfig("similar sweep axis '" + axis.quantity +
                          "' must be a basis member");
    }
    if (!axis.similar && is_basis) {
      throw InvalidConfig("non-similar sweep axis '" + axis.quantity +
                          "' cannot be a basis member");
    }
  }

  std::size_t total = 1;
  for (const SweepAxis& axis : spec.axes) total *= axis.factors.size();

  std::vector<Context> contexts;
  contexts.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    // Row-major decomposition: first axis varies slowest.
    std::map<std::string, double> basis_overrides;
    std::map<std::string, double> raw_overrides;
    std::size_t rem = idx;
    for (std::size_t a = spec.axes.size(); a-- > 0;) {
      const SweepAxis& axis = spec.axes[a];
      const std::size_t fi = rem % axis.factors.size();
      rem /= axis.factors.size();
      const double value = axis.factors[fi] * original.value(axis.quantity);
      if (axis.similar) {
        basis_overrides[axis.quantity] = value;
      } else {
        raw_overrides[axis.quantity] = value;
      }
    }
    Context ctx = generate_similar_context(original, basis_overrides, raw_overrides);
    contexts.push_back(ctx.renamed(spec.name + "/" + std::to_string(idx)));
  }
  return contexts;
}

double relative_reward(double oracle_reward, double tested_reward) {
  if (tested_reward == 0.0) {
    return oracle_reward == 0.0 ? 1.0 : std::numeric_limits<double>::quiet_NaN();
  }
  return oracle_reward / tested_reward;
}

TransferReport evaluate_transfers(const Context& original,
                                  const PolicyGrid& source_policy,
                                  const std::vector<Context>& contexts,
                                  const EvaluateOptions& options) {
  const PendulumState start = evaluation_start();
  TransferReport report;
  report.reserve(contexts.size());
  for (const Context& ctx : contexts) {
    TransferReportRow row{ctx};
    try {
      row.distance = context_distance(original, ctx);
      row.fingerprint_matched = source_policy.fingerprint() == ctx.fingerprint();
      if (!row.fingerprint_matched) {
        row.warning = "policy fingerprint differs from evaluation context";
      }
      const PendulumParams params = PendulumParams::from_context(ctx);

      auto run = [&](TransferMode mode, double& reward_out, double& clamp_out) {
        const TransferredPolicy adapter =
            mode == TransferMode::naive
                ? naive_transfer(source_policy, original, ctx)
                : scaled_transfer(source_policy, original, ctx);
        std::size_t queries = 0;
        std::size_t clamped = 0;
        const Trajectory traj = rollout(
            params,
            [&](double theta, double theta_dot) {
              const PolicyGrid::Query q = adapter.query(theta, theta_dot);
              ++queries;
              clamped += q.input_clamped ? 1 : 0;
              return q.tau;
            },
            start);
        reward_out = traj.total_reward;
        clamp_out = queries == 0 ? 0.0 : static_cast<double>(clamped) / queries;
      };
      run(TransferMode::naive, row.naive_reward, row.naive_clamp_frac);
      run(TransferMode::scaled, row.scaled_reward, row.scaled_clamp_frac);

      if (options.oracle == OracleMode::per_context_dp) {
        GridSpec synth_spec = options.oracle_synthesis;
        synth_spec.threads = options.threads;
        const SynthesisResult oracle = value_iteration(params, synth_spec);
        const Trajectory traj = rollout(params, policy_callable(oracle.policy), start);
        row.oracle_reward = traj.total_reward;
        row.naive_relative = relative_reward(row.oracle_reward, row.naive_reward);
        row.scaled_relative = relative_reward(row.oracle_reward, row.scaled_reward);
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    report.push_back(std::move(row));
  }
  return report;
}

SweepSummary summarize(const TransferReport& report) {
  if (report.empty()) throw EmptyReport("summarize needs at least one report row");
  SweepSummary s;
  s.contexts = report.size();
  double naive_sum = 0.0;
  double scaled_sum = 0.0;
  std::size_t similar_with_oracle = 0;
  std::size_t similar_near_optimal = 0;
  for (const TransferReportRow& row : report) {
    if (!row.error.empty()) continue;
    ++s.evaluated;
    naive_sum += row.naive_reward;
    scaled_sum += row.scaled_reward;
    const double diff = row.scaled_reward - row.naive_reward;
    if (std::abs(diff) <= SweepSummary::kTieTol) {
      ++s.ties;
    } else if (diff > 0.0) {
      ++s.scaled_wins;
    } else {
      ++s.naive_wins;
    }
    if (row.distance < SweepSummary::kSimilarDistanceTol) {
      ++s.similar_contexts;
      if (std::isfinite(row.scaled_relative)) {
        ++similar_with_oracle;
        if (row.scaled_relative >= 0.98) ++similar_near_optimal;
      }
    }
  }
  if (s.evaluated > 0) {
    s.mean_naive_reward = naive_sum / static_cast<double>(s.evaluated);
    s.mean_scaled_reward = scaled_sum / static_cast<double>(s.evaluated);
  }
  if (similar_with_oracle > 0) {
    s.similar_near_optimal_fraction =
        static_cast<double>(similar_near_optimal) / similar_with_oracle;
  }
  return s;
}

ordered_json summary_to_json(const SweepSummary& s) {
  ordered_json doc{
      {"contexts", s.contexts},
      {"evaluated", s.evaluated},
      {"scaled_wins", s.scaled_wins},
      {"naive_wins", s.naive_wins},
      {"ties", s.ties},
      {"mean_naive_reward", s.mean_naive_reward},
      {"mean_scaled_reward", s.mean_scaled_reward},
      {"similar_contexts", s.similar_contexts},
  };
  if (std::isfinite(s.similar_near_optimal_fraction)) {
    doc["similar_near_optimal_fraction"] = s.similar_near_optimal_fraction;
  } else {
    doc["similar_near_optimal_fraction"] = nullptr;
  }
  return doc;
}

void export_csv(const TransferReport& report, std::ostream& out) {
  if (report.empty()) throw EmptyReport("export_csv needs at least one report row");
  out << kCsvHeader << '\n';
  for (const TransferReportRow& row : report) {
    const Context& c = row.context;
    const std::string prefix = fmt17(c.value("m")) + "," + fmt17(c.value("l")) + "," +
                               fmt17(c.value("g")) + "," + fmt17(c.value("tau_max")) +
                               "," + fmt17(c.value("t_f")) + "," +
                               fmt17(c.value("w_theta")) + "," + fmt17(c.value("w_tau")) +
                               "," + fmt17(c.value("dt")) + "," + fmt17(row.distance);
    const bool failed = !row.error.empty();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out << prefix << ",naive," << fmt17(failed ? nan : row.naive_reward) << ","
        << fmt17(failed ? nan : row.naive_relative) << ","
        << fmt17(failed ? nan : row.naive_clamp_frac) << '\n';
    out << prefix << ",scaled," << fmt17(failed ? nan : row.scaled_reward) << ","
        << fmt17(failed ? nan : row.scaled_relative) << ","
        << fmt17(failed ? nan : row.scaled_clamp_frac) << '\n';
  }
}

void export_csv(const TransferReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open report file for writing: " + path.string());
  export_csv(report, out);
  if (!out) throw IoError("failed writing report file: " + path.string());
}

TransferReport import_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report file: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw InvalidConfig("report file " + path.string() + " has an unexpected header");
  }
  auto split = [](const std::string& text) {
    std::vector<std::string> fields;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
  };

  TransferReport report;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> naive_fields = split(line);
    if (!std::getline(in, line)) {
      throw InvalidConfig("report file " + path.string() +
                          " ends with an unpaired naive row");
    }
    ++line_no;
    const std::vector<std::string> scaled_fields = split(line);
    if (naive_fields.size() != 13 || scaled_fields.size() != 13 ||
        naive_fields[9] != "naive" || scaled_fields[9] != "scaled") {
      throw InvalidConfig("report file " + path.string() + " is malformed near line " +
                          std::to_string(line_no));
    }
    PendulumParams p;
    p.m = std::stod(naive_fields[0]);
    p.l = std::stod(naive_fields[1]);
    p.g = std::stod(naive_fields[2]);
    p.tau_max = std::stod(naive_fields[3]);
    p.t_f = std::stod(naive_fields[4]);
    p.w_theta = std::stod(naive_fields[5]);
    p.w_tau = std::stod(naive_fields[6]);
    p.dt = std::stod(naive_fields[7]);
    TransferReportRow row{p.to_context("imported")};
    row.distance = std::stod(naive_fields[8]);
    row.naive_reward = std::stod(naive_fields[10]);
    row.naive_relative = std::stod(naive_fields[11]);
    row.naive_clamp_frac = std::stod(naive_fields[12]);
    row.scaled_reward = std::stod(scaled_fields[10]);
    row.scaled_relative = std::stod(scaled_fields[11]);
    row.scaled_clamp_frac = std::stod(scaled_fields[12]);
    row.oracle_reward = std::isfinite(row.naive_relative) && row.naive_reward != 0.0
                            ? row.naive_relative * row.naive_reward
                            : std::numeric_limits<double>::quiet_NaN();
    report.push_back(std::move(row));
  }
  if (report.empty()) throw EmptyReport("report file " + path.string() + " has no rows");
  return report;
}

ReportMetric parse_metric(const std::string& name) {
  if (name == "total_reward") return ReportMetric::total_reward;
  if (name == "relative_reward") return ReportMetric::relative_reward;
  if (name == "clamp_frac") return ReportMetric::clamp_frac;
  throw InvalidConfig("unknown report metric '" + name + "'");
}

void export_svg_heatmap(const TransferReport& report, const std::string& x_axis,
                        const std::string& y_axis, ReportMetric metric,
                        const std::filesystem::path& path) {
  if (report.empty()) throw EmptyReport("export_svg_heatmap needs report rows");
  for (const std::string& axis : {x_axis, y_axis}) {
    if (!report.front().context.has(axis)) {
      throw UnknownAxis("axis '" + axis + "' is not a context quantity");
    }
  }

  std::vector<double> xs, ys;
  double metric_lo = std::numeric_limits<double>::infinity();
  double metric_hi = -std::numeric_limits<double>::infinity();
  for (const TransferReportRow& row : report) {
    const double x = row.context.value(x_axis);
    const double y = row.context.value(y_axis);
    if (!(x > 0.0) || !(y > 0.0)) {
      throw InvalidConfig("heatmap axes need positive values for the log scale");
    }
    xs.push_back(std::log10(x));
    ys.push_back(std::log10(y));
    for (TransferMode mode : {TransferMode::naive, TransferMode::scaled}) {
      const double v = metric_value(row, metric, mode);
      if (std::isfinite(v)) {
        metric_lo = std::min(metric_lo, v);
        metric_hi = std::max(metric_hi, v);
      }
    }
  }
  const double x_lo = *std::min_element(xs.begin(), xs.end());
  const double x_hi = *std::max_element(xs.begin(), xs.end());
  const double y_lo = *std::min_element(ys.begin(), ys.end());
  const double y_hi = *std::max_element(ys.begin(), ys.end());

  const double panel = 260.0;
  const double margin_left = 70.0;
  const double margin_top = 50.0;
  const double gap = 60.0;
  const double legend_w = 70.0;
  const double width = margin_left + 2 * panel + gap + legend_w + 30.0;
  const double height = margin_top + panel + 60.0;
  SvgBuilder svg(width, height);

  const std::set<double> distinct_x(xs.begin(), xs.end());
  const std::set<double> distinct_y(ys.begin(), ys.end());
  const double marker = 0.85 * panel / std::max<std::size_t>(
                                           {distinct_x.size(), distinct_y.size(), 3});

  auto map_x = [&](double lx, double panel_x0) {
    if (x_hi == x_lo) return panel_x0 + panel / 2.0;
    return panel_x0 + (lx - x_lo) / (x_hi - x_lo) * (panel - marker) + marker / 2.0;
  };
  auto map_y = [&](double ly) {
    if (y_hi == y_lo) return margin_top + panel / 2.0;
    return margin_top + panel - ((ly - y_lo) / (y_hi - y_lo) * (panel - marker) + marker / 2.0);
  };
  auto normalized = [&](double v) {
    if (!(metric_hi > metric_lo)) return 0.5;
    return (v - metric_lo) / (metric_hi - metric_lo);
  };

  const TransferMode modes[] = {TransferMode::naive, TransferMode::scaled};
  const char* mode_names[] = {"naive", "scaled"};
  for (int panel_idx = 0; panel_idx < 2; ++panel_idx) {
    const double x0 = margin_left + panel_idx * (panel + gap);
    svg.rect(x0, margin_top, panel, panel, "none", "#444", 1.0);
    svg.text(x0 + panel / 2.0, margin_top - 12.0,
             std::string(mode_names[panel_idx]) + " transfer", 14, "middle");
    for (std::size_t r = 0; r < report.size(); ++r) {
      const double v = metric_value(report[r], metric, modes[panel_idx]);
      const std::string fill = std::isfinite(v) ? colormap(normalized(v)) : "#bbbbbb";
      const double cx = map_x(xs[r], x0);
      const double cy = map_y(ys[r]);
      svg.rect(cx - marker / 2.0, cy - marker / 2.0, marker, marker, fill);
    }
    for (std::size_t r = 0; r < report.size(); ++r) {
      if (report[r].distance < 1e-12) {
        svg.star(map_x(xs[r], x0), map_y(ys[r]), marker * 0.55, "#e63933");
      }
    }
    svg.text(x0 + panel / 2.0, margin_top + panel + 34.0, x_axis, 13, "middle");
    char tick[48];
    std::snprintf(tick, sizeof(tick), "%.3g", std::pow(10.0, x_lo));
    svg.text(x0, margin_top + panel + 16.0, tick, 11, "middle");
    std::snprintf(tick, sizeof(tick), "%.3g", std::pow(10.0, x_hi));
    svg.text(x0 + panel, margin_top + panel + 16.0, tick, 11, "middle");
  }
  {
    char tick[48];
    svg.text(margin_left - 46.0, margin_top + panel / 2.0, y_axis, 13, "middle");
    std::snprintf(tick, sizeof(tick), "%.3g", std::pow(10.0, y_lo));
    svg.text(margin_left - 8.0, margin_top + panel, tick, 11, "end");
    std::snprintf(tick, sizeof(tick), "%.3g", std::pow(10.0, y_hi));
    svg.text(margin_left - 8.0, margin_top + 10.0, tick, 11, "end");
  }

  // colour legend
  const double legend_x = margin_left + 2 * panel + gap + 20.0;
  const int strips = 40;
  for (int i = 0; i < strips; ++i) {
    const double t = 1.0 - static_cast<double>(i) / (strips - 1);
    svg.rect(legend_x, margin_top + i * panel / strips, 16.0, panel / strips + 0.5,
             colormap(t));
  }
  {
    char label[48];
    std::snprintf(label, sizeof(label), "%.4g", metric_hi);
    svg.text(legend_x + 20.0, margin_top + 10.0, label, 11);
    std::snprintf(label, sizeof(label), "%.4g", metric_lo);
    svg.text(legend_x + 20.0, margin_top + panel, label, 11);
    svg.text(legend_x, margin_top - 12.0, metric_name(metric), 12);
  }

  std::ofstream out(path);
  if (!out) throw IoError("cannot open SVG file for writing: " + path.string());
  out << svg.str();
  if (!out) throw IoError("failed writing SVG file: " + path.string());
}

}  // namespace pitransfer
