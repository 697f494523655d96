#include "rumorperc/exact_dominance.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace rumorperc::exactdom {

namespace {

mpz_class binom(unsigned long n, unsigned long k) {
  mpz_class out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return out;
}

// a (a-1) ... (a-t+1); 1 for t = 0, 0 once the factors cross zero.
mpz_class falling(std::int64_t a, std::int64_t t) {
  mpz_class out = 1;
  for (std::int64_t i = 0; i < t; ++i) {
    if (a - i <= 0) return 0;
    out *= static_cast<unsigned long>(a - i);
  }
  return out;
}

std::vector<mpz_class> powers(std::uint64_t base, std::size_t up_to) {
  std::vector<mpz_class> p(up_to + 1);
  p[0] = 1;
  for (std::size_t i = 1; i <= up_to; ++i) p[i] = p[i - 1] * static_cast<unsigned long>(base);
  return p;
}

// Numerators of NH(N, d, r) survival over the common denominator C(N, d):
// entry t is P(X >= r + t) * C(N, d), for t in [0, N - d + 1] (last entry 0).
std::vector<mpz_class> nh_survival_numerators(std::uint32_t N, std::uint32_t d, std::uint32_t r) {
  const std::int64_t lo = r;
  const std::int64_t hi = static_cast<std::int64_t>(N) - d + r;
  std::vector<mpz_class> surv(static_cast<std::size_t>(hi - lo + 2), 0);
  mpz_class acc = 0;
  for (std::int64_t k = hi; k >= lo; --k) {
    acc += binom(static_cast<unsigned long>(k - 1), r - 1) *
           binom(static_cast<unsigned long>(N - k), d - r);
    surv[static_cast<std::size_t>(k - lo)] = acc;
  }
  return surv;
}

// Numerator of P(sum of `terms` Geo(a/N) >= k) over the denominator
// N^(k-1): survival
//   P(S >= k) = P(Bin(k-1, a/N) <= terms-1)
//             = sum_{i < terms} C(k-1, i) a^i (N-a)^(k-1-i) / N^(k-1).
mpz_class geom_sum_survival_numerator(std::uint32_t terms, std::int64_t k,
                                      const std::vector<mpz_class>& a_pow,
                                      const std::vector<mpz_class>& b_pow) {
  mpz_class out = 0;
  const std::int64_t trials = k - 1;
  for (std::uint32_t i = 0; i < terms; ++i) {
    if (static_cast<std::int64_t>(i) > trials) break;
    out += binom(static_cast<unsigned long>(trials), i) * a_pow[i] *
           b_pow[static_cast<std::size_t>(trials - i)];
  }
  return out;
}

}  // namespace

ExactCheckResult check_first_pick(std::uint32_t k1, std::uint32_t k2) {
  if (k1 < 1 || k2 < 1) throw std::invalid_argument("first_pick: need k1, k2 >= 1");
  const std::int64_t N = static_cast<std::int64_t>(k1) + k2;
  // P(X_1 >= m) = prod_{i=0}^{m-2} (k2 - i) / (N - i); compare against
  // (k2 / N)^(m-1) by cross-multiplication.
  const std::int64_t m_max = static_cast<std::int64_t>(k2) + 2;
  const auto k2_pow = powers(k2, static_cast<std::size_t>(m_max));
  const auto n_pow = powers(static_cast<std::uint64_t>(N), static_cast<std::size_t>(m_max));
  for (std::int64_t m = 1; m <= m_max; ++m) {
    const mpz_class lhs = falling(k2, m - 1) * n_pow[static_cast<std::size_t>(m - 1)];
    const mpz_class rhs = k2_pow[static_cast<std::size_t>(m - 1)] * falling(N, m - 1);
    if (lhs > rhs) return {false, m};
  }
  return {true, -1};
}

ExactCheckResult check_rank(std::uint32_t k1, std::uint32_t k2, std::uint32_t j) {
  if (k1 < 1 || k2 < 1) throw std::invalid_argument("rank: need k1, k2 >= 1");
  if (j < 1 || j >= k1)
    throw std::invalid_argument("rank: need 1 <= j < k1 for a positive geometric parameter");
  const std::uint32_t N = k1 + k2;
  const std::uint64_t a = k1 - j;       // geometric success numerator
  const std::uint64_t b = k2 + j;       // N - a
  const std::int64_t hi = static_cast<std::int64_t>(k2) + j;  // NH support max
  const auto nh_surv = nh_survival_numerators(N, k1, j);
  const mpz_class nh_den = binom(N, k1);
  const auto a_pow = powers(a, static_cast<std::size_t>(hi));
  const auto b_pow = powers(b, static_cast<std::size_t>(hi));
  const auto n_pow = powers(N, static_cast<std::size_t>(hi));
  for (std::int64_t k = j; k <= hi; ++k) {
    const mpz_class& nh_num = nh_surv[static_cast<std::size_t>(k - j)];
    const mpz_class nb_num = geom_sum_survival_numerator(j, k, a_pow, b_pow);
    // nh_num / nh_den <= nb_num / N^(k-1)
    const mpz_class lhs = nh_num * n_pow[static_cast<std::size_t>(k - 1)];
    const mpz_class rhs = nb_num * nh_den;
    if (lhs > rhs) return {false, k};
  }
  return {true, -1};
}

ExactCheckResult check_rank_pair(std::uint32_t k1, std::uint32_t k2, std::uint32_t j,
                                 std::uint32_t l) {
  if (k1 < 1 || k2 < 1) throw std::invalid_argument("rank_pair: need k1, k2 >= 1");
  const std::uint32_t jl_max = std::max(j, l);
  if (j < 1 || l < 1 || jl_max >= k1)
    throw std::invalid_argument("rank_pair: need 1 <= j, l and max(j, l) < k1");
  const std::uint32_t N = k1 + k2;
  const mpz_class den = binom(N, k1);

  auto pmf_nums = [&](std::uint32_t r) {
    const std::int64_t lo = r;
    const std::int64_t hi = static_cast<std::int64_t>(k2) + r;
    std::vector<mpz_class> pmf(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t k = lo; k <= hi; ++k) {
      pmf[static_cast<std::size_t>(k - lo)] =
          binom(static_cast<unsigned long>(k - 1), r - 1) *
          binom(static_cast<unsigned long>(N - k), k1 - r);
    }
    return pmf;
  };
  const auto pj = pmf_nums(j);
  const auto pl = pmf_nums(l);
  // Convolution numerators over den^2; support [j + l, 2 k2 + j + l].
  std::vector<mpz_class> conv(pj.size() + pl.size() - 1, 0);
  for (std::size_t x = 0; x < pj.size(); ++x) {
    if (pj[x] == 0) continue;
    for (std::size_t y = 0; y < pl.size(); ++y) conv[x + y] += pj[x] * pl[y];
  }
  const std::int64_t lo = static_cast<std::int64_t>(j) + l;
  const std::int64_t hi = lo + 2 * static_cast<std::int64_t>(k2);
  std::vector<mpz_class> surv(conv.size() + 1, 0);
  for (std::size_t i = conv.size(); i-- > 0;) surv[i] = surv[i + 1] + conv[i];

  const std::uint32_t terms = j + l;
  const std::uint64_t a = k1 - jl_max;
  const std::uint64_t b = N - a;
  const auto a_pow = powers(a, static_cast<std::size_t>(hi));
  const auto b_pow = powers(b, static_cast<std::size_t>(hi));
  const auto n_pow = powers(N, static_cast<std::size_t>(hi));
  const mpz_class den2 = den * den;
  for (std::int64_t k = lo; k <= hi; ++k) {
    const mpz_class nb_num = geom_sum_survival_numerator(terms, k, a_pow, b_pow);
    const mpz_class lhs = surv[static_cast<std::size_t>(k - lo)] * n_pow[static_cast<std::size_t>(k - 1)];
    const mpz_class rhs = nb_num * den2;
    if (lhs > rhs) return {false, k};
  }
  return {true, -1};
}

namespace {

void note_violation(GridReport& report, const std::string& what) {
  report.violations += 1;
  if (report.first_violation.empty()) report.first_violation = what;
}

}  // namespace

GridReport run_first_pick_grid(std::uint32_t max_k) {
  GridReport report;
  for (std::uint32_t k1 = 1; k1 <= max_k; ++k1) {
    for (std::uint32_t k2 = 1; k2 <= max_k; ++k2) {
      report.checks_run += 1;
      const auto res = check_first_pick(k1, k2);
      if (!res.ok) {
        std::ostringstream what;
        what << "first_pick k1=" << k1 << " k2=" << k2 << " at k=" << res.first_violation_k;
        note_violation(report, what.str());
      }
    }
  }
  return report;
}

GridReport run_rank_grid(std::uint32_t max_k) {
  GridReport report;
  for (std::uint32_t k1 = 2; k1 <= max_k; ++k1) {
    for (std::uint32_t k2 = 1; k2 <= max_k; ++k2) {
      for (std::uint32_t j = 1; j < k1; ++j) {
        report.checks_run += 1;
        const auto res = check_rank(k1, k2, j);
        if (!res.ok) {
          std::ostringstream what;
          what << "rank k1=" << k1 << " k2=" << k2 << " j=" << j << " at k="
               << res.first_violation_k;
          note_violation(report, what.str());
        }
      }
    }
  }
  return report;
}

GridReport run_rank_pair_grid(std::uint32_t max_k, std::uint32_t max_rank) {
  GridReport report;
  for (std::uint32_t k1 = 2; k1 <= max_k; ++k1) {
    for (std::uint32_t k2 = 1; k2 <= max_k; ++k2) {
      const std::uint32_t rank_cap = std::min(max_rank, k1 - 1);
      for (std::uint32_t j = 1; j <= rank_cap; ++j) {
        for (std::uint32_t l = j; l <= rank_cap; ++l) {
          report.checks_run += 1;
          const auto res = check_rank_pair(k1, k2, j, l);
          if (!res.ok) {
            std::ostringstream what;
            what << "rank_pair k1=" << k1 << " k2=" << k2 << " j=" << j << " l=" << l
                 << " at k=" << res.first_violation_k;
            note_violation(report, what.str());
          }
        }
      }
    }
  }
  return report;
}

mpq_class nh_pmf_exact(std::uint32_t N, std::uint32_t d, std::uint32_t r, std::int64_t k) {
  if (d < 1 || d > N || r < 1 || r > d) throw std::invalid_argument("nh_pmf_exact: bad params");
  if (k < static_cast<std::int64_t>(r) || k > static_cast<std::int64_t>(N) - d + r) return 0;
  mpq_class out(binom(static_cast<unsigned long>(k - 1), r - 1) *
                    binom(static_cast<unsigned long>(N - k), d - r),
                binom(N, d));
  out.canonicalize();
  return out;
}

}  // namespace rumorperc::exactdom
