#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "rumorperc/experiments.hpp"

using namespace rumorperc;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("tmp_experiments_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("protocol names round trip") {
  CHECK(protocol_name(Protocol::kPush) == std::string("push"));
  CHECK(protocol_name(Protocol::kPwr) == std::string("pwr"));
  CHECK(parse_protocol("push") == Protocol::kPush);
  CHECK(parse_protocol("pwr") == Protocol::kPwr);
  CHECK_FALSE(parse_protocol("gossip").has_value());
  CHECK(parse_suite("tailbound") == VerifySuite::kTailBound);
  CHECK(parse_suite("all") == VerifySuite::kAll);
  CHECK_FALSE(parse_suite("everything").has_value());
}

TEST_CASE("estimator on an edge is deterministic and exact") {
  RuntimeOptions opts;
  opts.graph_desc = "complete:2";
  const RuntimeSummary s =
      estimate_runtime(Graph::complete(2), 0, Protocol::kPush, 100, RngStream(5, 0), opts);
  for (const auto& q : s.quantiles) {
    REQUIRE(q.has_value());
    CHECK(*q == 1.0);
  }
  CHECK(s.mean == 1.0);
  CHECK(s.censored_fraction == 0.0);
  CHECK(s.disconnected_fraction == 0.0);
  CHECK(s.quantile(0.95) == 1.0);
  CHECK_FALSE(s.quantile(0.7).has_value());
  CHECK(s.to_json() ==
        "{\"graph\":\"complete:2\",\"start\":0,\"protocol\":\"push\",\"trials\":100,\"p\":null,"
        "\"round_cap\":14,\"seed\":5,\"quantiles\":{\"0.5\":1,\"0.9\":1,\"0.95\":1,\"0.99\":1},"
        "\"mean\":1,\"censored_fraction\":0,\"disconnected_fraction\":0}");
}

TEST_CASE("estimator validates its inputs") {
  CHECK_THROWS_AS(
      estimate_runtime(Graph::complete(4), 0, Protocol::kPush, 99, RngStream(1, 0), {}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      estimate_runtime(Graph::complete(4), 4, Protocol::kPush, 100, RngStream(1, 0), {}),
      std::invalid_argument);
  CHECK_THROWS_AS(estimate_runtime_percolated(Graph::complete(4), 1.5, 0, Protocol::kPush, 100,
                                              RngStream(1, 0), {}),
                  std::invalid_argument);
}

TEST_CASE("worker pool does not change results") {
  const Graph g = Graph::complete(64);
  RuntimeOptions serial;
  serial.graph_desc = "complete:64";
  RuntimeOptions pooled = serial;
  pooled.workers = 3;
  const auto a = estimate_runtime(g, 0, Protocol::kPwr, 300, RngStream(6, 0), serial);
  const auto b = estimate_runtime(g, 0, Protocol::kPwr, 300, RngStream(6, 0), pooled);
  CHECK(a == b);
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("percolation at p=1 reproduces the dry estimate") {
  const Graph g = Graph::complete(32);
  RuntimeOptions opts;
  opts.graph_desc = "complete:32";
  const auto dry = estimate_runtime(g, 0, Protocol::kPush, 150, RngStream(7, 0), opts);
  auto wet = estimate_runtime_percolated(g, 1.0, 0, Protocol::kPush, 150, RngStream(7, 0), opts);
  CHECK(wet.p == 1.0);
  wet.p.reset();
  CHECK(wet == dry);
}

TEST_CASE("heavy percolation disconnects and censors") {
  RuntimeOptions opts;
  opts.graph_desc = "complete:8";
  opts.round_cap = 30;
  const auto s = estimate_runtime_percolated(Graph::complete(8), 1e-9, 0, Protocol::kPush, 120,
                                             RngStream(8, 0), opts);
  CHECK(s.disconnected_fraction == 1.0);
  CHECK(s.censored_fraction == 1.0);
  CHECK_FALSE(s.mean.has_value());
  CHECK_FALSE(s.quantiles[0].has_value());
}

TEST_CASE("summary json round trips through parsing") {
  RuntimeOptions opts;
  opts.graph_desc = "hypercube:4";
  const auto s = estimate_runtime_percolated(Graph::hypercube(4), 0.8, 3, Protocol::kPwr, 200,
                                             RngStream(9, 0), opts);
  const auto back = RuntimeSummary::from_json(s.to_json());
  CHECK(back == s);
  CHECK(back.to_json() == s.to_json());
  CHECK_THROWS(RuntimeSummary::from_json("{\"graph\":\"x\"}"));
  CHECK_THROWS(RuntimeSummary::from_json("not json"));
}

TEST_CASE("sweep rows are sorted, in regime flags set, p=1 pinned to ratio one") {
  const Graph g = Graph::complete(64);
  SweepOptions opts;
  opts.graph_desc = "complete:64";
  const auto result =
      robustness_sweep(g, 0, {1.0, 0.25}, 0.15, 200, RngStream(10, 0), opts);
  CHECK(result.eps == 0.15);
  CHECK(result.quantile_level == 0.95);
  CHECK(result.master_seed == 10);
  REQUIRE(result.rows.size() == 2);
  CHECK(result.rows[0].p == 0.25);
  CHECK(result.rows[1].p == 1.0);
  REQUIRE(result.rows[1].ratio.has_value());
  CHECK(*result.rows[1].ratio == 1.0);
  CHECK(result.rows[1].summary.quantiles == result.baseline.quantiles);
  const auto t95 = result.baseline.quantile(0.95);
  REQUIRE(t95.has_value());
  CHECK(result.rows[0].pd_over_T == 0.25 * 63 / *t95);
  CHECK(result.rows[0].outside_regime == (result.rows[0].pd_over_T < 4.0));
  CHECK(result.rows[1].disconnect_rate == 0.0);
}

TEST_CASE("sweep validates parameters") {
  const Graph star = Graph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
  CHECK_THROWS_AS(robustness_sweep(star, 0, {0.5}, 0.1, 100, RngStream(1, 0), {}),
                  std::invalid_argument);
  const Graph g = Graph::complete(8);
  CHECK_THROWS_AS(robustness_sweep(g, 0, {0.0}, 0.1, 100, RngStream(1, 0), {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(robustness_sweep(g, 0, {1.5}, 0.1, 100, RngStream(1, 0), {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(robustness_sweep(g, 9, {0.5}, 0.1, 100, RngStream(1, 0), {}),
                  std::invalid_argument);
  SweepOptions bad_level;
  bad_level.quantile_level = 1.0;
  CHECK_THROWS_AS(robustness_sweep(g, 0, {0.5}, 0.1, 100, RngStream(1, 0), bad_level),
                  std::invalid_argument);
}

TEST_CASE("sweep csv has the frozen schema and empty cells for missing values") {
  SweepResult result;
  result.eps = 0.1;
  result.master_seed = 3;
  result.baseline.quantiles = {std::optional<double>{11.0}, std::optional<double>{13.0},
                               std::optional<double>{14.0}, std::optional<double>{15.0}};
  result.baseline.trials = 200;
  SweepRow row;
  row.p = 0.5;
  row.pd_over_T = 2.25;
  row.outside_regime = true;
  row.ratio = std::nullopt;  // never completed: empty cell
  row.disconnect_rate = 1.0;
  row.summary.trials = 200;
  result.rows.push_back(row);
  CHECK(result.to_csv() ==
        "p,pd_over_T,t_g_q50,t_g_q95,t_gp_q50,t_gp_q95,ratio_95,disconnect_rate,trials,seed\n"
        "0.5,2.25,11,14,,,,1,200,3\n");

  result.rows.clear();
  CHECK(result.to_csv() ==
        "p,pd_over_T,t_g_q50,t_g_q95,t_gp_q50,t_gp_q95,ratio_95,disconnect_rate,trials,seed\n");
}

TEST_CASE("sweep json round trips") {
  const Graph g = Graph::complete(32);
  SweepOptions opts;
  opts.graph_desc = "complete:32";
  const auto result = robustness_sweep(g, 0, {0.5, 1.0}, 0.1, 150, RngStream(11, 0), opts);
  const auto back = SweepResult::from_json(result.to_json());
  CHECK(back == result);
  CHECK(back.to_json() == result.to_json());
  CHECK(back.to_csv() == result.to_csv());
}

TEST_CASE("export writes the same bytes the serializers produce") {
  const Graph g = Graph::complete(32);
  SweepOptions opts;
  opts.graph_desc = "complete:32";
  const auto result = robustness_sweep(g, 0, {1.0}, 0.1, 120, RngStream(12, 0), opts);
  TempFile csv("a.csv"), json("a.json"), summary("b.json");
  export_results(result, csv.path, ExportFormat::kCsv);
  CHECK(slurp(csv.path) == result.to_csv());
  export_results(result, json.path, ExportFormat::kJson);
  CHECK(slurp(json.path) == result.to_json());
  export_results(result.baseline, summary.path, ExportFormat::kJson);
  CHECK(slurp(summary.path) == result.baseline.to_json());
  CHECK_THROWS_AS(export_results(result.baseline, "b.csv", ExportFormat::kCsv),
                  std::invalid_argument);
  CHECK_THROWS_AS(export_results(result, "no_such_dir/x.csv", ExportFormat::kCsv),
                  std::runtime_error);
}

TEST_CASE("verification report gates on gating entries only") {
  VerificationReport report;
  CHECK(report.all_passed());
  CheckResult soft;
  soft.name = "advisory";
  soft.pass = false;
  soft.gating = false;
  report.entries.push_back(soft);
  CHECK(report.all_passed());
  CheckResult hard;
  hard.name = "law";
  hard.pass = false;
  report.entries.push_back(hard);
  CHECK_FALSE(report.all_passed());
}

TEST_CASE("dominance suite passes at a reduced budget and serializes") {
  const auto report = verify_suite(VerifySuite::kDominance, 0.05, RngStream(13, 0));
  CHECK(report.all_passed());
  CHECK(report.entries.size() >= 5);
  const auto parsed = nlohmann::json::parse(report.to_json());
  CHECK(parsed.at("all_passed").get<bool>());
  CHECK(parsed.at("budget").get<double>() == 0.05);
  CHECK(parsed.at("checks").size() == report.entries.size());
  CHECK_THROWS_AS(verify_suite(VerifySuite::kDominance, 0.0, RngStream(13, 0)),
                  std::invalid_argument);
}
