// exact_dominance.hpp — exact integer-arithmetic dominance checks between
// negative hypergeometric waiting times and geometric sums.
//
// Setting: a population of k1 + k2 items, k1 of them "useful", scanned in
// uniformly random order. X_j ~ NH(k1 + k2, k1, j) is the scan position of
// the j-th useful item. The checks certify, with no floating point:
//
//   first_pick:    X_1                     <=st  Geo(k1 / (k1 + k2))
//   rank:          X_j                     <=st  sum of j   i.i.d. Geo((k1 - j) / (k1 + k2))
//   rank_pair:     X_j + X'_l independent  <=st  sum of j+l i.i.d. Geo((k1 - max(j, l)) / (k1 + k2))
//
// All survival functions are rationals with small structured denominators,
// so every comparison is a cross-multiplied mpz comparison.
#pragma once

#include <cstdint>
#include <string>

#include <gmpxx.h>

namespace rumorperc::exactdom {

struct ExactCheckResult {
  bool ok = true;
  std::int64_t first_violation_k = -1;  // point where dominance first fails
};

ExactCheckResult check_first_pick(std::uint32_t k1, std::uint32_t k2);
// Requires 1 <= j < k1 (the geometric parameter must stay positive).
ExactCheckResult check_rank(std::uint32_t k1, std::uint32_t k2, std::uint32_t j);
// Requires 1 <= j, l and max(j, l) < k1.
ExactCheckResult check_rank_pair(std::uint32_t k1, std::uint32_t k2, std::uint32_t j,
                                 std::uint32_t l);

struct GridReport {
  std::uint64_t checks_run = 0;
  std::uint64_t violations = 0;
  std::string first_violation;  // empty when clean

  bool clean() const { return violations == 0 && checks_run > 0; }
};

// first_pick over all 1 <= k1, k2 <= max_k.
GridReport run_first_pick_grid(std::uint32_t max_k);
// rank over all 1 <= k1, k2 <= max_k, 1 <= j < k1.
GridReport run_rank_grid(std::uint32_t max_k);
// rank_pair over 1 <= k1, k2 <= max_k, 1 <= j, l <= min(max_rank, k1 - 1).
GridReport run_rank_pair_grid(std::uint32_t max_k, std::uint32_t max_rank);

// Exact NH(N, d, r) pmf at k, as a rational. Oracle for the floating-point
// implementation.
mpq_class nh_pmf_exact(std::uint32_t N, std::uint32_t d, std::uint32_t r, std::int64_t k);

}  // namespace rumorperc::exactdom
