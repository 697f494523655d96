// couplings.hpp — joint constructions that realize the dominance arguments
// pathwise:
//
//  1. A shared-randomness coupling of push and push-without-replacement on
//     the same graph, driven by per-vertex i.i.d. uniform choice sequences.
//     Push consumes the raw sequence; the without-replacement run consumes
//     the subsequence of first occurrences, which is a uniform permutation
//     whose waiting-time gaps are independent geometrics. The informed set
//     of push is contained in the without-replacement informed set in every
//     round, by construction.
//
//  2. A per-edge Bernoulli coupling between a graph and its percolation,
//     producing for every vertex a "lower" neighbor subset N_u (i.i.d.
//     Be(q) marks) sandwiched inside an "upper" subset N_u^p (i.i.d.
//     Be(CT/d) marks) that lives inside the percolated neighborhood, with
//     N_u <= N_u^p pointwise surely.
//
//  3. Conditioned neighbor orderings on top of (2): both orderings put the
//     marked subsets first, and the percolated-side ordering keeps the base
//     ordering of N_u, extended by a uniform interleaving of the extra
//     marks. The rank of a N_u element inside the percolated ordering is
//     then negative hypergeometric given the subset sizes.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rumorperc/graph.hpp"
#include "rumorperc/protocols.hpp"
#include "rumorperc/rng.hpp"

namespace rumorperc {

// First-occurrence structure of an i.i.d. uniform sequence on [0, s).
struct DistinctPickSequence {
  std::uint32_t degree = 0;          // s
  std::vector<std::uint32_t> picks;  // distinct values in first-occurrence order
  std::vector<std::uint32_t> gaps;   // gaps[k] = X_{k+1} - X_k with X_0 = 0; gaps[0] == 1
};

// Records the first k_needed distinct picks (k_needed <= s).
DistinctPickSequence sample_distinct_pick_sequence(std::uint32_t s, std::uint32_t k_needed,
                                                   RngStream rng);

// Runs push and push-without-replacement on g from the same per-vertex
// choice sequences. Returns (push trace, without-replacement trace); the
// push informed set is contained in the other one round by round.
std::pair<ProtocolTrace, ProtocolTrace> run_coupled_push_pwr(const Graph& g, Vertex start,
                                                             RngStream rng, RunOptions opts = {});

// One draw of the two-directions-of-an-edge coupling. Marginally:
// a ~ Be(p); (b1, b2) i.i.d. Be(r) independent of a; ip_k = a & b_k;
// (i1, i2) i.i.d. Be(q) with q = p r (1 - r/2); and i_k <= ip_k surely.
struct PairSample {
  bool i1 = false, i2 = false;
  bool ip1 = false, ip2 = false;
  bool a = false;
  bool b1 = false, b2 = false;
};

struct PairCouplingParams {
  double p = 0.0;
  double r = 0.0;
  double q = 0.0;
  // Cumulative weights of the nine monotone transport cells; see the .cpp.
  double cum[9] = {};
  double a_given_both_zero = 0.0;  // P(a = 1 | ip pair = (0,0))

  // Validates p in (0, 1], r in (0, 1), and the two Strassen feasibility
  // inequalities q^2 <= p r^2 and 2q - q^2 <= p r (2 - r).
  static PairCouplingParams make(double p, double r);
};

PairSample sample_pair_coupling(const PairCouplingParams& params, RngStream& rng);
inline PairSample sample_pair_coupling(double p, double r, RngStream& rng) {
  return sample_pair_coupling(PairCouplingParams::make(p, r), rng);
}

// Derived parameters of the edge coupling at degree d, percolation p, and
// round budget T.
struct EdgeCouplingParams {
  std::uint32_t d = 0;
  double p = 0.0;
  std::uint32_t T = 0;
  double C = 0.0;          // sqrt(p d / T)
  double r = 0.0;          // C T / (p d) = sqrt(T / (p d))
  double upper = 0.0;      // C T / d = sqrt(p T / d): Be parameter of the upper marks
  double q = 0.0;          // lower Be parameter, (CT/d)(1 - CT/(2 p d))
  double q_flat = 0.0;     // (CT/d)(1 - CT/(p d)); reported alongside q, not used to sample
  double excess = 0.0;     // (CT/d)^2 / (2 p): per-direction Be parameter of ip - i
  double delta = 0.0;      // max(C^{-1/2}, sqrt(CT/(p d)))
  PairCouplingParams pair;

  // Requires r < 1 and CT/d <= 1 (equivalently T < p d <= d^2 / T).
  static EdgeCouplingParams make(std::uint32_t d, double p, std::uint32_t T);
};

// Marginal view of a single vertex: its d incident edges' coupled
// indicators. Same law as any one vertex inside a full build.
struct VertexStarSample {
  std::vector<std::uint8_t> lower;     // i: membership in N_u
  std::vector<std::uint8_t> upper;     // ip: membership in N_u^p
  std::vector<std::uint8_t> retained;  // a: membership in the percolated star
  std::uint32_t lower_count = 0;
  std::uint32_t upper_count = 0;
  std::uint32_t retained_count = 0;
};

VertexStarSample sample_vertex_star(const EdgeCouplingParams& params, RngStream& rng);

// Whole-graph build: one pair draw per undirected edge, in canonical edge
// order. g must be regular.
class EdgeIndicatorCoupling {
 public:
  EdgeIndicatorCoupling(const Graph& g, double p, std::uint32_t T, RngStream rng);

  const EdgeCouplingParams& params() const { return params_; }
  const Graph& base() const { return *base_; }
  const Graph& percolated() const { return percolated_; }
  std::span<const Edge> retained_edges() const { return retained_; }
  const std::vector<Vertex>& lower_set(Vertex u) const { return lower_sets_[u]; }
  const std::vector<Vertex>& upper_set(Vertex u) const { return upper_sets_[u]; }
  std::uint32_t lower_count(Vertex u) const {
    return static_cast<std::uint32_t>(lower_sets_[u].size());
  }
  std::uint32_t upper_count(Vertex u) const {
    return static_cast<std::uint32_t>(upper_sets_[u].size());
  }
  std::uint32_t extra_count(Vertex u) const { return upper_count(u) - lower_count(u); }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  const Graph* base_;
  EdgeCouplingParams params_;
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::vector<Edge> retained_;
  std::vector<std::vector<Vertex>> lower_sets_;
  std::vector<std::vector<Vertex>> upper_sets_;
  Graph percolated_;
};

inline EdgeIndicatorCoupling build_edge_coupling(const Graph& g, double p, std::uint32_t T,
                                                 RngStream rng) {
  return EdgeIndicatorCoupling(g, p, T, rng);
}

// Uniform 0/1 mask of length n_old + n_new with exactly n_new ones, uniform
// over all placements. Zeros mark the slots of the "old" ordered elements.
std::vector<std::uint8_t> sample_uniform_interleaving(std::uint32_t n_old, std::uint32_t n_new,
                                                      RngStream& rng);

// 1-based positions of the old elements after a uniform interleaving. The
// j-th entry is NH(n_old + n_new, n_old, j)-distributed.
std::vector<std::uint32_t> sample_merge_ranks(std::uint32_t n_old, std::uint32_t n_new,
                                              RngStream& rng);

// Without-replacement runs on the base and percolated graphs under the
// conditioned orderings built from an edge coupling.
struct CoupledPwrRun {
  ProtocolTrace trace_base;
  ProtocolTrace trace_perc;
  std::vector<std::vector<Vertex>> ord;    // per-vertex ordering of the base neighborhood
  std::vector<std::vector<Vertex>> ord_p;  // per-vertex ordering of the percolated one
  // Construction invariants, re-verified on the produced orderings:
  bool ordering_consistent = false;  // N_u keeps its relative order inside ord_p
  bool rank_excess_ok = false;       // 0 <= rank_p(w) - rank(w) <= N_u^* for w in N_u
  // Analysis flags (recorded, not errors):
  bool base_choices_within_lower = false;  // no vertex chose past its N_u prefix
  bool perc_choices_within_upper = false;  // no vertex chose past its N_u^p prefix
  bool all_lower_above_ct_half = false;    // min_u N_u   > C T / 2
  bool all_upper_above_ct_half = false;    // min_u N_u^p > C T / 2
  bool all_lower_above_T = false;          // min_u N_u   > T
};

CoupledPwrRun run_coupled_pwr(const EdgeIndicatorCoupling& coupling, Vertex start, RngStream rng,
                              RunOptions opts = {});

}  // namespace rumorperc
