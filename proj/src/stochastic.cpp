#include "rumorperc/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rumorperc {

namespace {

double log_choose(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

void NhParams::validate() const {
  if (successes < 1 || successes > population)
    throw std::invalid_argument("nh: need 1 <= successes <= population");
  if (rank < 1 || rank > successes)
    throw std::invalid_argument("nh: need 1 <= rank <= successes");
}

std::uint64_t sample_geometric(double p, RngStream& rng) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("geometric: p must be in (0, 1]");
  if (p == 1.0) return 1;
  const double u = rng.next_unit_open();
  const double q = 1.0 - p;
  if (u > q) return 1;  // common case, no log needed
  return 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / std::log(q)));
}

double nh_pmf(const NhParams& params, std::int64_t k) {
  params.validate();
  if (k < params.support_min() || k > params.support_max()) return 0.0;
  const std::int64_t N = params.population;
  const std::int64_t d = params.successes;
  const std::int64_t r = params.rank;
  // P(X = k) = C(k-1, r-1) C(N-k, d-r) / C(N, d)
  return std::exp(log_choose(k - 1, r - 1) + log_choose(N - k, d - r) - log_choose(N, d));
}

double nh_mean(const NhParams& params) {
  params.validate();
  return static_cast<double>(params.rank) * (static_cast<double>(params.population) + 1.0) /
         (static_cast<double>(params.successes) + 1.0);
}

std::uint64_t sample_nh(const NhParams& params, RngStream& rng) {
  params.validate();
  std::uint64_t remaining = params.population;
  std::uint64_t successes_left = params.successes;
  std::uint32_t hits = 0;
  std::uint64_t draws = 0;
  for (;;) {
    draws += 1;
    // Next scanned item is a success with probability successes_left / remaining.
    if (rng.next_below(remaining) < successes_left) {
      successes_left -= 1;
      hits += 1;
      if (hits == params.rank) return draws;
    }
    remaining -= 1;
  }
}

DiscreteCdf exact_cdf_nh(const NhParams& params) {
  params.validate();
  if (params.population > 10000)
    throw std::invalid_argument("exact_cdf_nh: population must be <= 10^4");
  const std::int64_t lo = params.support_min();
  const std::int64_t hi = params.support_max();
  const std::int64_t N = params.population;
  const std::int64_t d = params.successes;
  const std::int64_t r = params.rank;
  std::vector<double> pmf(static_cast<std::size_t>(hi - lo + 1));
  // Start at k = r, then multiplicative recurrence:
  // P(k+1)/P(k) = [k / (k - r + 1)] [(N - k - d + r) / (N - k)]
  pmf[0] = std::exp(log_choose(N - r, d - r) - log_choose(N, d));
  for (std::int64_t k = lo; k < hi; ++k) {
    const double ratio = (static_cast<double>(k) / static_cast<double>(k - r + 1)) *
                         (static_cast<double>(N - k - d + r) / static_cast<double>(N - k));
    pmf[static_cast<std::size_t>(k - lo + 1)] = pmf[static_cast<std::size_t>(k - lo)] * ratio;
  }
  DiscreteCdf cdf;
  cdf.support_start = lo;
  cdf.survival.assign(pmf.size() + 1, 0.0);
  double acc = 0.0;
  for (std::size_t i = pmf.size(); i-- > 0;) {
    acc += pmf[i];
    cdf.survival[i] = acc;
  }
  cdf.survival.front() = 1.0;  // pin the exact value; float sum is within eps
  return cdf;
}

DiscreteCdf exact_cdf_geom_sum(std::uint32_t terms, double p, std::int64_t truncate_at) {
  if (terms < 1) throw std::invalid_argument("geom_sum: need at least one term");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("geom_sum: p must be in (0, 1]");
  if (truncate_at < static_cast<std::int64_t>(terms))
    throw std::invalid_argument("geom_sum: truncate_at below the support minimum");
  const std::size_t width = static_cast<std::size_t>(truncate_at) + 1;
  const double q = 1.0 - p;
  // pmf of a single geometric on [0, truncate_at]
  std::vector<double> geo(width, 0.0);
  for (std::size_t m = 1; m < width; ++m) geo[m] = p * std::pow(q, static_cast<double>(m - 1));
  std::vector<double> acc = geo;
  std::vector<double> next(width, 0.0);
  for (std::uint32_t t = 2; t <= terms; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t a = t - 1; a < width; ++a) {
      if (acc[a] == 0.0) continue;
      for (std::size_t m = 1; a + m < width; ++m) next[a + m] += acc[a] * geo[m];
    }
    acc.swap(next);
  }
  DiscreteCdf cdf;
  cdf.support_start = terms;
  cdf.survival.assign(width - terms + 1, 0.0);
  double total = 0.0;
  for (std::size_t i = cdf.survival.size(); i-- > 1;) {
    total += acc[terms + i - 1];
    cdf.survival[i - 1] = total;
  }
  cdf.tail_mass_bound = std::max(0.0, 1.0 - total);
  // P(X >= support_start) is exactly 1; pin it rather than storing the
  // truncated sum.
  cdf.survival.front() = 1.0;
  return cdf;
}

DominanceCheck check_dominance(const DiscreteCdf& lower, const DiscreteCdf& upper) {
  const std::int64_t from = std::min(lower.support_start, upper.support_start);
  const std::int64_t to = std::max(lower.support_end(), upper.support_end());
  for (std::int64_t k = from; k <= to; ++k) {
    if (lower.at(k) > upper.at(k) + upper.tail_mass_bound) {
      return {false, k};
    }
  }
  return {true, std::nullopt};
}

double geom_sum_tail_bound(std::uint32_t r, double C) {
  if (r < 1) throw std::invalid_argument("geom_sum_tail_bound: need r >= 1");
  if (!(C > 1.0)) throw std::invalid_argument("geom_sum_tail_bound: need C > 1");
  return std::exp(-(C - 1.0) * static_cast<double>(r));
}

double expdec_delta(double eps, double C) {
  if (!(eps > 0.0)) throw std::invalid_argument("expdec_delta: need eps > 0");
  if (!(C > 1.0)) throw std::invalid_argument("expdec_delta: need C > 1");
  return std::min(0.25, std::exp(-2.0 * C / eps));
}

}  // namespace rumorperc
