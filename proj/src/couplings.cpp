#include "rumorperc/couplings.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace rumorperc {

DistinctPickSequence sample_distinct_pick_sequence(std::uint32_t s, std::uint32_t k_needed,
                                                   RngStream rng) {
  if (s < 1) throw std::invalid_argument("distinct picks: need s >= 1");
  if (k_needed > s) throw std::invalid_argument("distinct picks: k_needed exceeds s");
  DistinctPickSequence out;
  out.degree = s;
  out.picks.reserve(k_needed);
  out.gaps.reserve(k_needed);
  std::vector<char> seen(s, 0);
  std::uint32_t gap = 0;
  while (out.picks.size() < k_needed) {
    gap += 1;
    const auto v = static_cast<std::uint32_t>(rng.next_below(s));
    if (!seen[v]) {
      seen[v] = 1;
      out.picks.push_back(v);
      out.gaps.push_back(gap);
      gap = 0;
    }
  }
  return out;
}

namespace {

// Per-vertex uniform choice sequence, materialized lazily, with its
// first-occurrence subsequence extracted on demand. Push reads theta(i);
// the without-replacement run reads distinct_at(k).
struct ThetaSource {
  RngStream rng;
  std::uint32_t s = 0;
  std::vector<std::uint32_t> draws;
  std::vector<std::uint32_t> distinct;
  std::vector<char> seen;
  std::uint32_t scanned = 0;

  std::uint32_t theta(std::uint32_t i) {
    while (draws.size() <= i) draws.push_back(static_cast<std::uint32_t>(rng.next_below(s)));
    return draws[i];
  }

  std::uint32_t distinct_at(std::uint32_t k) {
    assert(k < s);
    if (seen.empty()) seen.assign(s, 0);
    while (distinct.size() <= k) {
      const std::uint32_t v = theta(scanned);
      scanned += 1;
      if (!seen[v]) {
        seen[v] = 1;
        distinct.push_back(v);
      }
    }
    return distinct[k];
  }
};

}  // namespace

std::pair<ProtocolTrace, ProtocolTrace> run_coupled_push_pwr(const Graph& g, Vertex start,
                                                             RngStream rng, RunOptions opts) {
  const Vertex n = g.vertex_count();
  std::vector<ThetaSource> sources(n);
  const RngStream per_vertex = rng.substream(streams::kVertex);
  for (Vertex u = 0; u < n; ++u) {
    sources[u].rng = per_vertex.substream(u);
    sources[u].s = g.degree(u);
  }
  auto push_choice = [&](Vertex u, std::uint32_t k) -> std::optional<Vertex> {
    auto& src = sources[u];
    if (src.s == 0) return std::nullopt;
    return g.neighbors(u)[src.theta(k)];
  };
  auto pwr_choice = [&](Vertex u, std::uint32_t k) -> std::optional<Vertex> {
    auto& src = sources[u];
    if (k >= src.s) return std::nullopt;
    return g.neighbors(u)[src.distinct_at(k)];
  };
  ProtocolTrace push_trace = run_with_choice_fn(g, start, opts, push_choice);
  ProtocolTrace pwr_trace = run_with_choice_fn(g, start, opts, pwr_choice);
  return {std::move(push_trace), std::move(pwr_trace)};
}

PairCouplingParams PairCouplingParams::make(double p, double r) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("pair coupling: p must be in (0, 1]");
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("pair coupling: r must be in (0, 1)");
  PairCouplingParams out;
  out.p = p;
  out.r = r;
  const double q = p * r * (1.0 - r / 2.0);
  out.q = q;
  const double m11 = p * r * r;
  const double m10 = p * r * (1.0 - r);
  const double m00 = 1.0 - p * r * (2.0 - r);
  // Strassen feasibility on the two-bit lattice; holds for every p, r in
  // range, checked anyway so a bad parametrization cannot slip through.
  if (q * q > m11 * (1.0 + 1e-12))
    throw std::invalid_argument("pair coupling: infeasible, q^2 > p r^2");
  if (2.0 * q - q * q > p * r * (2.0 - r) * (1.0 + 1e-12))
    throw std::invalid_argument("pair coupling: infeasible on the one-coordinate upset");

  // Monotone transport, greedy along (0,0) < (0,1) <= (1,0) < (1,1) and
  // symmetric in the two coordinates: each Be(q)^2 outcome maps to the
  // smallest allowed upper outcome with remaining mass.
  const double diag = std::min(q * (1.0 - q), m10);
  const double up = q * (1.0 - q) - diag;
  const double w[9] = {
      q * q,                       // (1,1) -> (1,1)
      diag,                        // (0,1) -> (0,1)
      up,                          // (0,1) -> (1,1)
      diag,                        // (1,0) -> (1,0)
      up,                          // (1,0) -> (1,1)
      m00,                         // (0,0) -> (0,0)
      m10 - diag,                  // (0,0) -> (0,1)
      m10 - diag,                  // (0,0) -> (1,0)
      m11 - q * q - 2.0 * up,      // (0,0) -> (1,1)
  };
  double acc = 0.0;
  for (int i = 0; i < 9; ++i) {
    if (w[i] < -1e-12) throw std::invalid_argument("pair coupling: negative transport cell");
    acc += std::max(w[i], 0.0);
    out.cum[i] = acc;
  }
  assert(std::fabs(acc - 1.0) < 1e-9);
  out.cum[8] = 1.0;
  out.a_given_both_zero = p * (1.0 - r) * (1.0 - r) / m00;
  return out;
}

PairSample sample_pair_coupling(const PairCouplingParams& params, RngStream& rng) {
  static constexpr std::uint8_t kCellBits[9][4] = {
      // i1, i2, ip1, ip2
      {1, 1, 1, 1}, {0, 1, 0, 1}, {0, 1, 1, 1}, {1, 0, 1, 0}, {1, 0, 1, 1},
      {0, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}, {0, 0, 1, 1},
  };
  const double u = rng.next_double();
  int cell = 8;
  for (int i = 0; i < 9; ++i) {
    if (u < params.cum[i]) {
      cell = i;
      break;
    }
  }
  PairSample s;
  s.i1 = kCellBits[cell][0];
  s.i2 = kCellBits[cell][1];
  s.ip1 = kCellBits[cell][2];
  s.ip2 = kCellBits[cell][3];
  if (s.ip1 || s.ip2) {
    // ip = a & b forces a = 1 and b = ip.
    s.a = true;
    s.b1 = s.ip1;
    s.b2 = s.ip2;
  } else {
    s.a = rng.bernoulli(params.a_given_both_zero);
    if (s.a) {
      s.b1 = false;
      s.b2 = false;
    } else {
      s.b1 = rng.bernoulli(params.r);
      s.b2 = rng.bernoulli(params.r);
    }
  }
  return s;
}

EdgeCouplingParams EdgeCouplingParams::make(std::uint32_t d, double p, std::uint32_t T) {
  if (d < 1) throw std::invalid_argument("edge coupling: need degree >= 1");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("edge coupling: p must be in (0, 1]");
  if (T < 1) throw std::invalid_argument("edge coupling: need T >= 1");
  EdgeCouplingParams out;
  out.d = d;
  out.p = p;
  out.T = T;
  const double dd = static_cast<double>(d);
  const double tt = static_cast<double>(T);
  out.C = std::sqrt(p * dd / tt);
  out.r = out.C * tt / (p * dd);
  if (!(out.r < 1.0))
    throw std::invalid_argument("edge coupling: regime requires T < p d");
  out.upper = out.C * tt / dd;  // = p r <= r < 1
  out.q = out.upper * (1.0 - out.upper / (2.0 * p));
  out.q_flat = out.upper * (1.0 - out.upper / p);
  out.excess = out.upper * out.upper / (2.0 * p);
  out.delta = std::max(1.0 / std::sqrt(out.C), std::sqrt(out.r));
  out.pair = PairCouplingParams::make(p, out.r);
  return out;
}

VertexStarSample sample_vertex_star(const EdgeCouplingParams& params, RngStream& rng) {
  VertexStarSample out;
  out.lower.resize(params.d);
  out.upper.resize(params.d);
  out.retained.resize(params.d);
  for (std::uint32_t k = 0; k < params.d; ++k) {
    const PairSample s = sample_pair_coupling(params.pair, rng);
    out.lower[k] = s.i1;
    out.upper[k] = s.ip1;
    out.retained[k] = s.a;
    out.lower_count += s.i1;
    out.upper_count += s.ip1;
    out.retained_count += s.a;
  }
  return out;
}

EdgeIndicatorCoupling::EdgeIndicatorCoupling(const Graph& g, double p, std::uint32_t T,
                                             RngStream rng)
    : base_(&g),
      seed_(rng.seed()),
      stream_id_(rng.stream_id()),
      percolated_(Graph::Trusted{}, 1, {0, 0}, {}) {
  const auto d = g.regular_degree();
  if (!d || *d < 1) throw std::invalid_argument("edge coupling: graph must be regular, degree >= 1");
  params_ = EdgeCouplingParams::make(*d, p, T);

  const Vertex n = g.vertex_count();
  lower_sets_.resize(n);
  upper_sets_.resize(n);
  std::vector<std::size_t> counts(static_cast<std::size_t>(n) + 1, 0);
  for (Vertex u = 0; u < n; ++u) {
    for (const Vertex v : g.neighbors(u)) {
      if (v <= u) continue;
      const PairSample s = sample_pair_coupling(params_.pair, rng);
      if (s.a) {
        retained_.emplace_back(u, v);
        counts[u + 1] += 1;
        counts[v + 1] += 1;
      }
      // Canonical edge scan appends each vertex's neighbors in ascending
      // order, so the subset vectors come out sorted.
      if (s.i1) lower_sets_[u].push_back(v);
      if (s.ip1) upper_sets_[u].push_back(v);
      if (s.i2) lower_sets_[v].push_back(u);
      if (s.ip2) upper_sets_[v].push_back(u);
    }
  }
  for (Vertex v = 0; v < n; ++v) counts[v + 1] += counts[v];
  std::vector<Vertex> targets(counts.back());
  std::vector<std::size_t> fill(counts.begin(), counts.end() - 1);
  for (const auto& [u, v] : retained_) {
    targets[fill[u]++] = v;
    targets[fill[v]++] = u;
  }
  percolated_ = Graph(Graph::Trusted{}, n, std::move(counts), std::move(targets));
}

std::vector<std::uint8_t> sample_uniform_interleaving(std::uint32_t n_old, std::uint32_t n_new,
                                                      RngStream& rng) {
  const std::uint32_t total = n_old + n_new;
  std::vector<std::uint8_t> mask(total, 0);
  if (n_new == 0) return mask;
  std::vector<std::uint32_t> idx(total);
  for (std::uint32_t i = 0; i < total; ++i) idx[i] = i;
  for (std::uint32_t k = 0; k < n_new; ++k) {
    const std::uint32_t j = k + static_cast<std::uint32_t>(rng.next_below(total - k));
    std::swap(idx[k], idx[j]);
    mask[idx[k]] = 1;
  }
  return mask;
}

std::vector<std::uint32_t> sample_merge_ranks(std::uint32_t n_old, std::uint32_t n_new,
                                              RngStream& rng) {
  const auto mask = sample_uniform_interleaving(n_old, n_new, rng);
  std::vector<std::uint32_t> ranks;
  ranks.reserve(n_old);
  for (std::uint32_t pos = 0; pos < mask.size(); ++pos) {
    if (!mask[pos]) ranks.push_back(pos + 1);
  }
  return ranks;
}

namespace {

std::vector<Vertex> shuffled(std::vector<Vertex> xs, RngStream& rng) {
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const std::size_t j = k + rng.next_below(xs.size() - k);
    std::swap(xs[k], xs[j]);
  }
  return xs;
}

// Elements of universe (sorted) not in subset (sorted).
std::vector<Vertex> complement_of(std::span<const Vertex> universe,
                                  const std::vector<Vertex>& subset) {
  std::vector<Vertex> out;
  out.reserve(universe.size() - subset.size());
  std::set_difference(universe.begin(), universe.end(), subset.begin(), subset.end(),
                      std::back_inserter(out));
  return out;
}

// Number of choices vertex u made in a finished trace: one per round it was
// active, bounded by its ordering length.
std::uint32_t choices_made(const ProtocolTrace& trace, std::int64_t informed_at,
                           std::size_t ordering_len) {
  if (informed_at < 0) return 0;
  const std::int64_t last_round = static_cast<std::int64_t>(trace.rounds.size()) - 1;
  const std::int64_t active = std::max<std::int64_t>(0, last_round - informed_at);
  return static_cast<std::uint32_t>(
      std::min<std::int64_t>(active, static_cast<std::int64_t>(ordering_len)));
}

}  // namespace

CoupledPwrRun run_coupled_pwr(const EdgeIndicatorCoupling& coupling, Vertex start, RngStream rng,
                              RunOptions opts) {
  const Graph& g = coupling.base();
  const Graph& gp = coupling.percolated();
  const Vertex n = g.vertex_count();
  if (start >= n) throw std::invalid_argument("run_coupled_pwr: start out of range");
  const auto& params = coupling.params();

  CoupledPwrRun run;
  run.ord.resize(n);
  run.ord_p.resize(n);
  run.ordering_consistent = true;
  run.rank_excess_ok = true;

  const RngStream ord_streams = rng.substream(streams::kOrdering);
  for (Vertex u = 0; u < n; ++u) {
    RngStream vr = ord_streams.substream(u);
    const auto& lower = coupling.lower_set(u);
    const auto& upper = coupling.upper_set(u);

    // Base ordering: uniform order of N_u first, rest of the neighborhood
    // after, also in uniform order.
    const std::vector<Vertex> lower_ord = shuffled(lower, vr);
    const std::vector<Vertex> base_rest = shuffled(complement_of(g.neighbors(u), lower), vr);
    auto& ord = run.ord[u];
    ord.reserve(g.degree(u));
    ord.insert(ord.end(), lower_ord.begin(), lower_ord.end());
    ord.insert(ord.end(), base_rest.begin(), base_rest.end());

    // Percolated ordering: N_u^p first, as the N_u order with the extra
    // elements interleaved uniformly, then the rest of Gamma_p(u).
    std::vector<Vertex> extra;
    extra.reserve(upper.size() - lower.size());
    std::set_difference(upper.begin(), upper.end(), lower.begin(), lower.end(),
                        std::back_inserter(extra));
    const std::vector<Vertex> extra_ord = shuffled(std::move(extra), vr);
    const auto mask = sample_uniform_interleaving(static_cast<std::uint32_t>(lower_ord.size()),
                                                  static_cast<std::uint32_t>(extra_ord.size()), vr);
    auto& ordp = run.ord_p[u];
    ordp.reserve(gp.degree(u));
    std::size_t lo = 0, ex = 0;
    for (const auto bit : mask) {
      if (bit) {
        ordp.push_back(extra_ord[ex++]);
      } else {
        // rank_p(w) - rank(w) = number of extras interleaved before w.
        if (ordp.size() < lo || ordp.size() - lo > extra_ord.size()) run.rank_excess_ok = false;
        ordp.push_back(lower_ord[lo++]);
      }
    }
    const std::vector<Vertex> perc_rest = shuffled(complement_of(gp.neighbors(u), upper), vr);
    ordp.insert(ordp.end(), perc_rest.begin(), perc_rest.end());

    // Re-verify that N_u keeps its relative order inside ord_p.
    std::size_t seen_lower = 0;
    for (std::size_t i = 0; i < upper.size() && i < ordp.size(); ++i) {
      const Vertex w = ordp[i];
      if (std::binary_search(lower.begin(), lower.end(), w)) {
        if (seen_lower >= lower_ord.size() || lower_ord[seen_lower] != w) {
          run.ordering_consistent = false;
          break;
        }
        seen_lower += 1;
      }
    }
    if (seen_lower != lower_ord.size()) run.ordering_consistent = false;
  }

  run.trace_base = run_pwr_with_orderings(g, run.ord, start, opts);
  run.trace_perc = run_pwr_with_orderings(gp, run.ord_p, start, opts);

  const auto base_rounds = run.trace_base.inform_rounds();
  const auto perc_rounds = run.trace_perc.inform_rounds();
  run.base_choices_within_lower = true;
  run.perc_choices_within_upper = true;
  run.all_lower_above_ct_half = true;
  run.all_upper_above_ct_half = true;
  run.all_lower_above_T = true;
  const double ct_half = params.C * static_cast<double>(params.T) / 2.0;
  for (Vertex u = 0; u < n; ++u) {
    if (choices_made(run.trace_base, base_rounds[u], run.ord[u].size()) > coupling.lower_count(u))
      run.base_choices_within_lower = false;
    if (choices_made(run.trace_perc, perc_rounds[u], run.ord_p[u].size()) > coupling.upper_count(u))
      run.perc_choices_within_upper = false;
    if (static_cast<double>(coupling.lower_count(u)) <= ct_half)
      run.all_lower_above_ct_half = false;
    if (static_cast<double>(coupling.upper_count(u)) <= ct_half)
      run.all_upper_above_ct_half = false;
    if (coupling.lower_count(u) <= params.T) run.all_lower_above_T = false;
  }
  return run;
}

}  // namespace rumorperc
