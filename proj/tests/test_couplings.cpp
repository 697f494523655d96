#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "rumorperc/couplings.hpp"
#include "rumorperc/stats.hpp"
#include "rumorperc/stochastic.hpp"

using namespace rumorperc;

namespace {

bool informs_contained(const ProtocolTrace& inner, const ProtocolTrace& outer) {
  const auto a = inner.inform_rounds();
  const auto b = outer.inform_rounds();
  for (std::size_t v = 0; v < a.size(); ++v)
    if (a[v] >= 0 && (b[v] < 0 || b[v] > a[v])) return false;
  return true;
}

bool is_sorted_subset(const std::vector<Vertex>& sub, const std::vector<Vertex>& super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

}  // namespace

TEST_CASE("distinct pick sequences start with an immediate hit") {
  for (int i = 0; i < 200; ++i) {
    const auto seq = sample_distinct_pick_sequence(5, 5, RngStream(1, i));
    REQUIRE(seq.gaps.size() == 5);
    CHECK(seq.gaps[0] == 1);
    auto sorted = seq.picks;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::uint32_t>{0, 1, 2, 3, 4});
  }
  const auto partial = sample_distinct_pick_sequence(6, 2, RngStream(1, 999));
  CHECK(partial.picks.size() == 2);
  CHECK(partial.degree == 6);
  CHECK_THROWS_AS(sample_distinct_pick_sequence(3, 4, RngStream(1, 0)), std::invalid_argument);
  CHECK_THROWS_AS(sample_distinct_pick_sequence(0, 0, RngStream(1, 0)), std::invalid_argument);
}

TEST_CASE("second distinct pick on two symbols waits a geometric(1/2) time") {
  double sum = 0.0;
  const int m = 20000;
  RngStream root(2, 0);
  for (int i = 0; i < m; ++i) {
    auto rng = root.substream(i);
    sum += static_cast<double>(sample_distinct_pick_sequence(2, 2, rng).gaps[1]);
  }
  CHECK(sum / m == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("three-symbol first-occurrence order is a uniform permutation") {
  std::vector<std::vector<std::uint32_t>> perms{{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                                {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  std::vector<std::int64_t> perm_counts(6, 0);
  std::vector<std::int64_t> gap2_counts(12, 0), gap3_counts(12, 0);
  std::int64_t gap2_tail = 0, gap3_tail = 0;
  std::vector<std::vector<std::int64_t>> table(6, std::vector<std::int64_t>(3, 0));
  const int m = 30000;
  RngStream root(3, 0);
  for (int i = 0; i < m; ++i) {
    auto rng = root.substream(i);
    const auto seq = sample_distinct_pick_sequence(3, 3, rng);
    const auto perm = std::find(perms.begin(), perms.end(), seq.picks) - perms.begin();
    REQUIRE(perm < 6);
    perm_counts[perm] += 1;
    const auto tally = [](std::vector<std::int64_t>& counts, std::int64_t& tail, std::uint32_t g) {
      if (g >= 1 && g <= 12)
        counts[g - 1] += 1;
      else
        tail += 1;
    };
    tally(gap2_counts, gap2_tail, seq.gaps[1]);
    tally(gap3_counts, gap3_tail, seq.gaps[2]);
    table[perm][std::min<std::uint32_t>(seq.gaps[1], 3u) - 1] += 1;
  }
  CHECK(stats::chi_square_gof(std::vector<double>(6, 1.0 / 6), perm_counts).pvalue > 1e-4);

  const auto geo_probs = [](double p) {
    std::vector<double> probs;
    for (int k = 1; k <= 12; ++k) probs.push_back(p * std::pow(1 - p, k - 1));
    return probs;
  };
  CHECK(stats::chi_square_gof(geo_probs(2.0 / 3), gap2_counts, gap2_tail).pvalue > 1e-4);
  CHECK(stats::chi_square_gof(geo_probs(1.0 / 3), gap3_counts, gap3_tail).pvalue > 1e-4);
  CHECK(stats::chi_square_independence(table).pvalue > 1e-4);
}

TEST_CASE("coupled push and without-replacement runs nest pathwise") {
  const Graph g = Graph::complete(16);
  RngStream root(4, 0);
  for (int i = 0; i < 500; ++i) {
    const auto [push_trace, pwr_trace] = run_coupled_push_pwr(g, 0, root.substream(i));
    REQUIRE(informs_contained(push_trace, pwr_trace));
    REQUIRE(push_trace.completion_round.has_value());
    REQUIRE(pwr_trace.completion_round.has_value());
    CHECK(*pwr_trace.completion_round <= *push_trace.completion_round);
  }
  // Replays bit for bit.
  const auto a = run_coupled_push_pwr(g, 0, root.substream(7));
  const auto b = run_coupled_push_pwr(g, 0, root.substream(7));
  CHECK(a.first.rounds == b.first.rounds);
  CHECK(a.second.rounds == b.second.rounds);
}

TEST_CASE("pair coupling parameters") {
  const auto params = PairCouplingParams::make(0.5, 0.2);
  CHECK(params.q == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(params.a_given_both_zero > 0.0);
  CHECK_THROWS_AS(PairCouplingParams::make(0.0, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(PairCouplingParams::make(1.2, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(PairCouplingParams::make(0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(PairCouplingParams::make(0.5, 1.0), std::invalid_argument);
}

TEST_CASE("pair coupling marginals and sure pointwise order") {
  const auto params = PairCouplingParams::make(0.5, 0.2);
  RngStream rng(5, 0);
  const int m = 20000;
  double i1 = 0, i2 = 0, ip1 = 0, ip2 = 0, a = 0, b1 = 0, both = 0;
  for (int i = 0; i < m; ++i) {
    const PairSample s = sample_pair_coupling(params, rng);
    REQUIRE(s.i1 <= s.ip1);
    REQUIRE(s.i2 <= s.ip2);
    REQUIRE(s.ip1 == (s.a && s.b1));
    REQUIRE(s.ip2 == (s.a && s.b2));
    i1 += s.i1;
    i2 += s.i2;
    ip1 += s.ip1;
    ip2 += s.ip2;
    a += s.a;
    b1 += s.b1;
    both += s.i1 && s.i2;
  }
  const auto near = [m](double sum, double expected) {
    const double se = std::sqrt(expected * (1 - expected) / m);
    return std::abs(sum / m - expected) < 5 * se;
  };
  CHECK(near(i1, 0.09));
  CHECK(near(i2, 0.09));
  CHECK(near(ip1, 0.1));
  CHECK(near(ip2, 0.1));
  CHECK(near(a, 0.5));
  CHECK(near(b1, 0.2));
  CHECK(near(both, 0.09 * 0.09));  // lower marks are independent
}

TEST_CASE("edge coupling parameter anchors") {
  const auto p1 = EdgeCouplingParams::make(100, 0.5, 10);
  CHECK(p1.C == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
  CHECK(p1.r == doctest::Approx(0.4472135954999579).epsilon(1e-12));
  CHECK(p1.upper == doctest::Approx(0.2236067977499790).epsilon(1e-12));
  CHECK(p1.q == doctest::Approx(0.1736067977499790).epsilon(1e-12));
  CHECK(p1.q_flat == doctest::Approx(0.1236067977499790).epsilon(1e-12));
  CHECK(p1.excess == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(p1.delta == doctest::Approx(std::pow(10.0 / 50.0, 0.25)).epsilon(1e-12));
  CHECK(p1.q + p1.excess == doctest::Approx(p1.upper).epsilon(1e-12));

  const auto p2 = EdgeCouplingParams::make(60, 0.6, 6);
  CHECK(p2.r == doctest::Approx(std::sqrt(6.0 / 36.0)).epsilon(1e-12));
  CHECK(p2.q == doctest::Approx(0.19494).epsilon(1e-4));

  CHECK_THROWS_AS(EdgeCouplingParams::make(10, 0.5, 6), std::invalid_argument);
  CHECK_THROWS_AS(EdgeCouplingParams::make(10, 0.5, 5), std::invalid_argument);  // r = 1
}

TEST_CASE("vertex star sample nests lower inside upper inside the kept star") {
  const auto params = EdgeCouplingParams::make(100, 0.5, 10);
  RngStream rng(6, 0);
  const int m = 20000;
  double lower = 0, upper = 0, kept = 0;
  for (int i = 0; i < m; ++i) {
    const VertexStarSample s = sample_vertex_star(params, rng);
    REQUIRE(s.lower.size() == 100);
    std::uint32_t nl = 0, nu = 0, nk = 0;
    for (std::size_t j = 0; j < 100; ++j) {
      REQUIRE(s.lower[j] <= s.upper[j]);
      REQUIRE(s.upper[j] <= s.retained[j]);
      nl += s.lower[j];
      nu += s.upper[j];
      nk += s.retained[j];
    }
    REQUIRE(nl == s.lower_count);
    REQUIRE(nu == s.upper_count);
    REQUIRE(nk == s.retained_count);
    lower += nl;
    upper += nu;
    kept += nk;
  }
  CHECK(lower / m == doctest::Approx(100 * params.q).epsilon(0.01));
  CHECK(upper / m == doctest::Approx(100 * params.upper).epsilon(0.01));
  CHECK(kept / m == doctest::Approx(50.0).epsilon(0.01));
}

TEST_CASE("whole-graph edge coupling keeps its subset chain per vertex") {
  const Graph g = Graph::random_regular(64, 20, 31);
  const EdgeIndicatorCoupling coupling(g, 0.5, 4, RngStream(7, 1));
  CHECK(coupling.params().d == 20);
  CHECK(&coupling.base() == &g);
  CHECK(coupling.percolated().vertex_count() == 64);
  CHECK(coupling.seed() == 7);
  CHECK(coupling.stream_id() == 1);
  CHECK(coupling.percolated().edge_count() == coupling.retained_edges().size());
  for (Vertex u = 0; u < 64; ++u) {
    const auto& lower = coupling.lower_set(u);
    const auto& upper = coupling.upper_set(u);
    const auto perc = coupling.percolated().neighbors(u);
    const std::vector<Vertex> perc_sorted(perc.begin(), perc.end());
    REQUIRE(std::is_sorted(lower.begin(), lower.end()));
    REQUIRE(std::is_sorted(upper.begin(), upper.end()));
    REQUIRE(is_sorted_subset(lower, upper));
    REQUIRE(is_sorted_subset(upper, perc_sorted));
    CHECK(coupling.lower_count(u) == lower.size());
    CHECK(coupling.extra_count(u) == upper.size() - lower.size());
  }
  // Same stream, same build.
  const EdgeIndicatorCoupling again(g, 0.5, 4, RngStream(7, 1));
  CHECK(again.percolated() == coupling.percolated());
  CHECK(again.lower_set(5) == coupling.lower_set(5));

  CHECK_THROWS_AS(EdgeIndicatorCoupling(Graph::from_edges(3, {{0, 1}, {1, 2}}), 0.5, 1,
                                        RngStream(7, 2)),
                  std::invalid_argument);
}

TEST_CASE("uniform interleavings have the right shape and law") {
  RngStream rng(8, 0);
  std::map<std::vector<std::uint8_t>, std::int64_t> counts;
  const int m = 20000;
  for (int i = 0; i < m; ++i) {
    const auto mask = sample_uniform_interleaving(3, 2, rng);
    REQUIRE(mask.size() == 5);
    REQUIRE(std::count(mask.begin(), mask.end(), 1) == 2);
    counts[mask] += 1;
  }
  REQUIRE(counts.size() == 10);  // C(5,2) placements
  std::vector<std::int64_t> flat;
  for (const auto& [mask, c] : counts) flat.push_back(c);
  CHECK(stats::chi_square_gof(std::vector<double>(10, 0.1), flat).pvalue > 1e-4);
}

TEST_CASE("merge ranks follow the negative hypergeometric law") {
  RngStream rng(9, 0);
  const int m = 20000;
  const DiscreteCdf oracle = exact_cdf_nh(NhParams{15, 12, 3});
  std::vector<std::int64_t> counts(4, 0);  // support {3, 4, 5, 6}
  for (int i = 0; i < m; ++i) {
    const auto ranks = sample_merge_ranks(12, 3, rng);
    REQUIRE(ranks.size() == 12);
    REQUIRE(std::is_sorted(ranks.begin(), ranks.end()));
    for (std::size_t j = 0; j < 12; ++j) {
      REQUIRE(ranks[j] >= j + 1);
      REQUIRE(ranks[j] <= j + 1 + 3);
    }
    counts[ranks[2] - 3] += 1;
  }
  std::vector<double> probs;
  for (std::int64_t k = 3; k <= 6; ++k) probs.push_back(oracle.at(k) - oracle.at(k + 1));
  CHECK(stats::chi_square_gof(probs, counts).pvalue > 1e-4);
}

TEST_CASE("conditioned orderings keep their construction invariants") {
  const Graph g = Graph::random_regular(64, 20, 31);
  const EdgeIndicatorCoupling coupling(g, 0.5, 4, RngStream(10, 0));
  RngStream root(11, 0);
  for (int i = 0; i < 100; ++i) {
    const CoupledPwrRun run = run_coupled_pwr(coupling, 0, root.substream(i));
    REQUIRE(run.ordering_consistent);
    REQUIRE(run.rank_excess_ok);
    run.trace_base.validate();
    run.trace_perc.validate();
  }
  const CoupledPwrRun run = run_coupled_pwr(coupling, 0, root.substream(0));
  for (Vertex u = 0; u < 64; ++u) {
    auto ord = run.ord[u];
    std::sort(ord.begin(), ord.end());
    const auto base_neighbors = g.neighbors(u);
    REQUIRE(ord == std::vector<Vertex>(base_neighbors.begin(), base_neighbors.end()));
    auto ordp = run.ord_p[u];
    std::sort(ordp.begin(), ordp.end());
    const auto perc_neighbors = coupling.percolated().neighbors(u);
    REQUIRE(ordp == std::vector<Vertex>(perc_neighbors.begin(), perc_neighbors.end()));
  }
  const CoupledPwrRun replay = run_coupled_pwr(coupling, 0, root.substream(0));
  CHECK(replay.trace_base.rounds == run.trace_base.rounds);
  CHECK(replay.trace_perc.rounds == run.trace_perc.rounds);
  CHECK(replay.ord == run.ord);
}
