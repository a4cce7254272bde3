#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pitransfer/context_io.hpp"
#include "pitransfer/sweep.hpp"

using namespace pitransfer;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "pitransfer_sweep_test";
  fs::create_directories(dir);
  return dir;
}

Context original_context() { return PendulumParams{}.to_context("c0"); }

GridSpec tiny_synthesis() {
  GridSpec spec;
  spec.n_theta = 41;
  spec.n_theta_dot = 41;
  spec.n_actions = 11;
  spec.threads = 2;
  return spec;
}

SweepSpec simple_spec(std::vector<SweepAxis> axes,
                      OracleMode oracle = OracleMode::none) {
  SweepSpec spec;
  spec.name = "test";
  spec.axes = std::move(axes);
  spec.oracle = oracle;
  spec.synthesis = tiny_synthesis();
  return spec;
}

const PolicyGrid& source_policy() {
  static const SynthesisResult result = [] {
    GridSpec spec = tiny_synthesis();
    spec.n_theta = 61;
    spec.n_theta_dot = 61;
    spec.n_actions = 21;
    return value_iteration(PendulumParams{}, spec);
  }();
  return result.policy;
}

}  // namespace

TEST_CASE("shipped sweep specs parse") {
  const SweepSpec full =
      load_sweep_spec(fs::path(PI_TRANSFER_DATA_DIR) / "sweep_full.json");
  REQUIRE(full.axes.size() == 3);
  CHECK(full.axes[0].quantity == "m");
  CHECK(full.axes[0].similar);
  CHECK(full.axes[2].quantity == "tau_max");
  CHECK_FALSE(full.axes[2].similar);
  CHECK(full.oracle == OracleMode::none);
  CHECK(full.synthesis.n_theta == 301);
  for (const SweepAxis& axis : full.axes) CHECK(axis.factors.size() == 5);

  const SweepSpec slice =
      load_sweep_spec(fs::path(PI_TRANSFER_DATA_DIR) / "sweep_slice.json");
  CHECK(slice.oracle == OracleMode::per_context_dp);
  REQUIRE(slice.axes.size() == 2);
  CHECK(slice.axes[0].factors.size() == 3);

  SUBCASE("json round trip preserves the spec") {
    const SweepSpec again = sweep_spec_from_json(sweep_spec_to_json(full));
    CHECK(again.name == full.name);
    REQUIRE(again.axes.size() == full.axes.size());
    for (std::size_t i = 0; i < full.axes.size(); ++i) {
      CHECK(again.axes[i].factors == full.axes[i].factors);
      CHECK(again.axes[i].similar == full.axes[i].similar);
    }
    CHECK(again.synthesis.gamma == full.synthesis.gamma);
  }
}

TEST_CASE("sweep spec validation") {
  CHECK_THROWS_AS(simple_spec({}).validate(), InvalidConfig);
  CHECK_THROWS_AS(simple_spec({{"m", {}, true}}).validate(), InvalidConfig);
  CHECK_THROWS_AS(simple_spec({{"m", {-1.0}, true}}).validate(), InvalidConfig);
  SweepSpec bad = simple_spec({{"m", {1.0}, true}});
  bad.synthesis.n_actions = 4;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  CHECK_THROWS_AS(
      sweep_spec_from_json(nlohmann::ordered_json{{"schema", 7}, {"axes", {}}}),
      FormatVersionMismatch);
}

TEST_CASE("build_grid") {
  const Context c0 = original_context();

  SUBCASE("unit factors reproduce the original context") {
    const auto contexts = build_grid(
        c0, simple_spec({{"m", {1.0}, true}, {"l", {1.0}, true},
                         {"tau_max", {1.0}, false}}));
    REQUIRE(contexts.size() == 1);
    CHECK(context_distance(c0, contexts[0]) == 0.0);
    for (std::size_t i = 0; i < c0.entries().size(); ++i) {
      CHECK(contexts[0].entries()[i].value == c0.entries()[i].value);
    }
  }
  SUBCASE("similar axes stay at distance zero") {
    const auto contexts = build_grid(
        c0, simple_spec({{"m", {0.1, 10.0}, true}, {"l", {0.1, 10.0}, true}}));
    REQUIRE(contexts.size() == 4);
    for (const Context& ctx : contexts) {
      CHECK(context_distance(c0, ctx) < 1e-10);
    }
  }
  SUBCASE("shipped full grid covers 125 contexts row-major") {
    const SweepSpec full =
        load_sweep_spec(fs::path(PI_TRANSFER_DATA_DIR) / "sweep_full.json");
    const auto contexts = build_grid(c0, full);
    REQUIRE(contexts.size() == 125);
    // first context: every factor at 0.1 (tau_max overridden after scaling)
    CHECK(contexts[0].value("m") == doctest::Approx(0.1));
    CHECK(contexts[0].value("l") == doctest::Approx(0.2));
    CHECK(contexts[0].value("tau_max") == doctest::Approx(0.8));
    // centre of the grid is the original context
    const std::size_t centre = (2 * 5 + 2) * 5 + 2;
    CHECK(context_distance(c0, contexts[centre]) == 0.0);
    CHECK(contexts[centre].value("tau_max") == 8.0);
    // last context: all factors at 10
    CHECK(contexts[124].value("m") == doctest::Approx(10.0));
    CHECK(contexts[124].value("l") == doctest::Approx(20.0));
    CHECK(contexts[124].value("tau_max") == doctest::Approx(80.0));
  }
  SUBCASE("axis flags must match basis membership") {
    CHECK_THROWS_AS(build_grid(c0, simple_spec({{"tau_max", {1.0}, true}})),
                    InvalidConfig);
    CHECK_THROWS_AS(build_grid(c0, simple_spec({{"m", {1.0}, false}})),
                    InvalidConfig);
    CHECK_THROWS_AS(build_grid(c0, simple_spec({{"nope", {1.0}, false}})),
                    InvalidConfig);
  }
}

TEST_CASE("relative reward orientation") {
  CHECK(relative_reward(-10.0, -10.0) == 1.0);
  CHECK(relative_reward(-10.0, -20.0) == 0.5);
  CHECK(relative_reward(-10.0, -5.0) == 2.0);
  CHECK(relative_reward(0.0, 0.0) == 1.0);
  CHECK(std::isnan(relative_reward(-1.0, 0.0)));
}

TEST_CASE("evaluate_transfers") {
  const Context c0 = original_context();
  const PolicyGrid& policy = source_policy();

  SUBCASE("original context row ties naive and scaled exactly") {
    const TransferReport report =
        evaluate_transfers(c0, policy, {c0}, EvaluateOptions{});
    REQUIRE(report.size() == 1);
    const TransferReportRow& row = report[0];
    CHECK(row.error.empty());
    CHECK(row.fingerprint_matched);
    CHECK(row.warning.empty());
    CHECK(row.distance == 0.0);
    CHECK(row.naive_reward == doctest::Approx(row.scaled_reward).epsilon(1e-12));
    CHECK(row.naive_reward < 0.0);
    CHECK(std::isnan(row.oracle_reward));
  }
  SUBCASE("similar contexts keep the scaled reward and flag the fingerprint") {
    const auto contexts =
        build_grid(c0, simple_spec({{"m", {0.5, 2.0}, true}, {"l", {0.5, 2.0}, true}}));
    const TransferReport report =
        evaluate_transfers(c0, policy, contexts, EvaluateOptions{});
    const Trajectory own = rollout(PendulumParams::from_context(c0),
                                   policy_callable(policy), evaluation_start());
    for (const TransferReportRow& row : report) {
      REQUIRE(row.error.empty());
      CHECK_FALSE(row.fingerprint_matched);
      CHECK_FALSE(row.warning.empty());
      CHECK(row.scaled_reward == doctest::Approx(own.total_reward).epsilon(1e-6));
      CHECK(row.naive_clamp_frac >= 0.0);
      CHECK(row.naive_clamp_frac <= 1.0);
    }
  }
  SUBCASE("per-context oracle fills relative rewards") {
    EvaluateOptions options;
    options.oracle = OracleMode::per_context_dp;
    options.oracle_synthesis = tiny_synthesis();
    options.threads = 2;
    const auto contexts = build_grid(c0, simple_spec({{"m", {1.0, 2.0}, true}}));
    const TransferReport report = evaluate_transfers(c0, policy, contexts, options);
    REQUIRE(report.size() == 2);
    for (const TransferReportRow& row : report) {
      REQUIRE(row.error.empty());
      CHECK(std::isfinite(row.oracle_reward));
      CHECK(row.oracle_reward < 0.0);
      CHECK(std::isfinite(row.scaled_relative));
      CHECK(row.scaled_relative ==
            doctest::Approx(row.oracle_reward / row.scaled_reward).epsilon(1e-15));
    }
  }
  SUBCASE("broken contexts are recorded, not fatal") {
    const Context broken = generate_similar_context(c0, {}, {{"t_f", -1.0}});
    const TransferReport report =
        evaluate_transfers(c0, policy, {c0, broken}, EvaluateOptions{});
    REQUIRE(report.size() == 2);
    CHECK(report[0].error.empty());
    CHECK_FALSE(report[1].error.empty());
    CHECK_NOTHROW(summarize(report));
  }
}

TEST_CASE("summarize") {
  const Context c0 = original_context();
  const PolicyGrid& policy = source_policy();

  SUBCASE("a single original-context row is a tie") {
    const TransferReport report =
        evaluate_transfers(c0, policy, {c0}, EvaluateOptions{});
    const SweepSummary summary = summarize(report);
    CHECK(summary.contexts == 1);
    CHECK(summary.ties == 1);
    CHECK(summary.scaled_wins == 0);
    CHECK(summary.naive_wins == 0);
    CHECK(summary.similar_contexts == 1);
  }
  SUBCASE("similar-only grids never favour the naive transfer") {
    const auto contexts = build_grid(
        c0, simple_spec({{"m", {0.1, 0.5, 2.0, 10.0}, true}, {"l", {0.5, 2.0}, true}}));
    const SweepSummary summary =
        summarize(evaluate_transfers(c0, policy, contexts, EvaluateOptions{}));
    CHECK(summary.naive_wins == 0);
    CHECK(summary.scaled_wins + summary.ties == summary.evaluated);
  }
  SUBCASE("wins, losses and ties partition the evaluated rows") {
    const SweepSpec full =
        load_sweep_spec(fs::path(PI_TRANSFER_DATA_DIR) / "sweep_full.json");
    SweepSpec cheap = full;
    for (SweepAxis& axis : cheap.axes) {
      axis.factors = {axis.factors.front(), 1.0, axis.factors.back()};
    }
    const auto contexts = build_grid(c0, cheap);
    REQUIRE(contexts.size() == 27);
    const SweepSummary summary =
        summarize(evaluate_transfers(c0, policy, contexts, EvaluateOptions{}));
    CHECK(summary.scaled_wins + summary.naive_wins + summary.ties == summary.evaluated);
    CHECK(summary.evaluated == 27);
  }
  SUBCASE("empty reports are rejected") {
    CHECK_THROWS_AS(summarize(TransferReport{}), EmptyReport);
  }
}

TEST_CASE("csv export") {
  const Context c0 = original_context();
  const PolicyGrid& policy = source_policy();
  const auto contexts =
      build_grid(c0, simple_spec({{"m", {0.5, 1.0, 2.0}, true},
                                  {"tau_max", {0.5, 2.0}, false}}));
  const TransferReport report =
      evaluate_transfers(c0, policy, contexts, EvaluateOptions{});

  std::ostringstream out;
  export_csv(report, out);
  std::istringstream in(out.str());
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header ==
        "m,l,g,tau_max,t_f,w_theta,w_tau,dt,distance,mode,total_reward,"
        "relative_reward,clamp_frac");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2 * contexts.size());

  SUBCASE("export is deterministic") {
    std::ostringstream again;
    export_csv(report, again);
    CHECK(again.str() == out.str());
  }
  SUBCASE("round trip through a file") {
    const fs::path path = temp_dir() / "report.csv";
    export_csv(report, path);
    const TransferReport back = import_csv(path);
    REQUIRE(back.size() == report.size());
    for (std::size_t i = 0; i < report.size(); ++i) {
      CHECK(back[i].context.value("m") == report[i].context.value("m"));
      CHECK(back[i].context.value("tau_max") == report[i].context.value("tau_max"));
      CHECK(back[i].distance == report[i].distance);
      CHECK(back[i].naive_reward == report[i].naive_reward);
      CHECK(back[i].scaled_reward == report[i].scaled_reward);
    }
  }
  SUBCASE("empty reports are rejected") {
    std::ostringstream sink;
    CHECK_THROWS_AS(export_csv(TransferReport{}, sink), EmptyReport);
  }
}

TEST_CASE("summary json") {
  const Context c0 = original_context();
  const TransferReport report =
      evaluate_transfers(c0, source_policy(), {c0}, EvaluateOptions{});
  const auto doc = summary_to_json(summarize(report));
  CHECK(doc["contexts"] == 1);
  CHECK(doc["ties"] == 1);
  CHECK(doc.contains("mean_scaled_reward"));
}

TEST_CASE("svg heatmap export") {
  const Context c0 = original_context();
  const PolicyGrid& policy = source_policy();
  const auto contexts =
      build_grid(c0, simple_spec({{"m", {0.5, 1.0, 2.0}, true},
                                  {"tau_max", {0.5, 1.0, 2.0}, false}}));
  const TransferReport report =
      evaluate_transfers(c0, policy, contexts, EvaluateOptions{});
  const fs::path path = temp_dir() / "heatmap.svg";
  export_svg_heatmap(report, "m", "tau_max", ReportMetric::total_reward, path);

  std::ifstream in(path);
  std::stringstream content;
  content << in.rdbuf();
  const std::string svg = content.str();
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("<polygon") != std::string::npos);  // original context star
  CHECK(svg.find("naive transfer") != std::string::npos);
  CHECK(svg.find("scaled transfer") != std::string::npos);

  SUBCASE("unknown axes are rejected") {
    CHECK_THROWS_AS(export_svg_heatmap(report, "bogus", "tau_max",
                                       ReportMetric::total_reward, path),
                    UnknownAxis);
  }
  SUBCASE("empty reports are rejected") {
    CHECK_THROWS_AS(export_svg_heatmap(TransferReport{}, "m", "tau_max",
                                       ReportMetric::total_reward, path),
                    EmptyReport);
  }
  SUBCASE("metric names parse") {
    CHECK(parse_metric("total_reward") == ReportMetric::total_reward);
    CHECK(parse_metric("relative_reward") == ReportMetric::relative_reward);
    CHECK(parse_metric("clamp_frac") == ReportMetric::clamp_frac);
    CHECK_THROWS_AS(parse_metric("nope"), InvalidConfig);
  }
}
