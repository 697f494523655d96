// stochastic.hpp — geometric and negative hypergeometric laws, exact
// survival tables, and one-sided stochastic-dominance checks.
//
// Conventions: Geometric(p) counts trials up to and including the first
// success, support {1, 2, ...}. NH(N, d, r) is the draw index of the r-th
// success when a population of N items containing d successes is scanned in
// uniformly random order without replacement; support [r, N - d + r].
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rumorperc/rng.hpp"

namespace rumorperc {

struct NhParams {
  std::uint32_t population;  // N
  std::uint32_t successes;   // d, 1 <= d <= N
  std::uint32_t rank;        // r, 1 <= r <= d

  void validate() const;
  std::int64_t support_min() const { return rank; }
  std::int64_t support_max() const {
    return static_cast<std::int64_t>(population) - successes + rank;
  }
};

// Survival table of an integer law: survival[i] = P(X >= support_start + i),
// survival[0] = 1, final entry 0 when the support is finite. For truncated
// laws, tail_mass_bound bounds the probability mass beyond the table, and
// stored survival values undercount true survival by at most that much.
struct DiscreteCdf {
  std::int64_t support_start = 0;
  std::vector<double> survival;
  double tail_mass_bound = 0.0;

  // P(X >= k) as stored: 1 below the support, 0 past the table.
  double at(std::int64_t k) const {
    if (k <= support_start) return 1.0;
    const std::int64_t i = k - support_start;
    if (i >= static_cast<std::int64_t>(survival.size())) return 0.0;
    return survival[static_cast<std::size_t>(i)];
  }
  std::int64_t support_end() const {
    return support_start + static_cast<std::int64_t>(survival.size());
  }
};

struct DominanceCheck {
  bool dominated = false;
  std::optional<std::int64_t> first_violation;
};

// One draw of Geometric(p). p in (0, 1].
std::uint64_t sample_geometric(double p, RngStream& rng);

// P(X = k) for X ~ NH(params), 0 outside the support. Log-space binomials.
double nh_pmf(const NhParams& params, std::int64_t k);

// E[X] = r (N + 1) / (d + 1), exact.
double nh_mean(const NhParams& params);

// One draw of NH(params) by sequential scan without replacement.
std::uint64_t sample_nh(const NhParams& params, RngStream& rng);

// Full survival table; requires population <= 10^4.
DiscreteCdf exact_cdf_nh(const NhParams& params);

// Survival table of a sum of `terms` independent Geometric(p) variables,
// truncated at truncate_at, by iterated convolution. tail_mass_bound is the
// mass the truncation discards.
DiscreteCdf exact_cdf_geom_sum(std::uint32_t terms, double p, std::int64_t truncate_at);

// One-sided check that lower is stochastically dominated by upper:
// survival_lower(k) <= survival_upper(k) + upper.tail_mass_bound for all k.
// Truncation slack on the upper table can hide a violation but never
// invent one.
DominanceCheck check_dominance(const DiscreteCdf& lower, const DiscreteCdf& upper);

// exp(-(C-1) r): tail bound for a sum of r geometrics with success
// probability close to 1 exceeding (1 + eps) r. Requires C > 1.
double geom_sum_tail_bound(std::uint32_t r, double C);

// min(1/4, exp(-2 C / eps)): the failure-probability level under which the
// tail bound above is claimed.
double expdec_delta(double eps, double C);

}  // namespace rumorperc
