#include <cmath>
#include <vector>

#include "doctest.h"
#include "rumorperc/rng.hpp"
#include "rumorperc/stats.hpp"

using namespace rumorperc;
using namespace rumorperc::stats;

TEST_CASE("regularized gamma agrees with closed forms") {
  // Q(1, x) = exp(-x); Q(1/2, x) = erfc(sqrt(x)).
  for (const double x : {0.1, 0.5, 1.0, 2.5, 10.0, 40.0}) {
    CHECK(gamma_q(1.0, x) == doctest::Approx(std::exp(-x)).epsilon(1e-10));
    CHECK(gamma_q(0.5, x) == doctest::Approx(std::erfc(std::sqrt(x))).epsilon(1e-10));
  }
  CHECK(gamma_q(3.0, 0.0) == 1.0);
}

TEST_CASE("chi square tail probabilities at textbook points") {
  CHECK(chi_square_pvalue(0.0, 5) == doctest::Approx(1.0));
  CHECK(chi_square_pvalue(3.841, 1) == doctest::Approx(0.05).epsilon(2e-3));
  CHECK(chi_square_pvalue(18.307, 10) == doctest::Approx(0.05).epsilon(2e-3));
  CHECK(chi_square_pvalue(2.0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
}

TEST_CASE("goodness of fit accepts matching counts and rejects gross mismatch") {
  const std::vector<double> probs{0.25, 0.25, 0.25, 0.25};
  const GofResult ok = chi_square_gof(probs, {250, 246, 259, 245});
  CHECK(ok.pvalue > 0.1);
  CHECK(ok.df == 3);
  const GofResult bad = chi_square_gof(probs, {400, 100, 400, 100});
  CHECK(bad.pvalue < 1e-10);
}

TEST_CASE("goodness of fit merges undersized cells") {
  // Second cell alone expects 1 count; it must get merged, shrinking df.
  const std::vector<double> probs{0.989, 0.001, 0.01};
  const GofResult r = chi_square_gof(probs, {989, 1, 10});
  CHECK(r.bins < 3);
  CHECK(r.pvalue > 0.05);
}

TEST_CASE("goodness of fit routes leftover mass to an implicit tail cell") {
  const std::vector<double> probs{0.5, 0.25};  // remaining 0.25 is the tail
  const GofResult r = chi_square_gof(probs, {500, 250}, 250);
  CHECK(r.pvalue > 0.5);
  const GofResult off = chi_square_gof(probs, {500, 450}, 50);
  CHECK(off.pvalue < 1e-10);
}

TEST_CASE("independence test separates product tables from coupled ones") {
  // Rows i.i.d. of columns: counts ~ outer product.
  const std::vector<std::vector<std::int64_t>> indep{{400, 400}, {100, 100}};
  CHECK(chi_square_independence(indep).pvalue > 0.5);
  const std::vector<std::vector<std::int64_t>> coupled{{400, 100}, {100, 400}};
  CHECK(chi_square_independence(coupled).pvalue < 1e-10);
}

TEST_CASE("two sample ks") {
  std::vector<double> a, b, c;
  RngStream rng(17, 0);
  for (int i = 0; i < 4000; ++i) {
    a.push_back(static_cast<double>(rng.next_below(10)));
    b.push_back(static_cast<double>(rng.next_below(10)));
    c.push_back(static_cast<double>(rng.next_below(10)) + (i % 2 ? 2.0 : 0.0));
  }
  const KsResult same = ks_two_sample(a, b);
  CHECK(same.pvalue > 1e-3);
  const KsResult ident = ks_two_sample(a, a);
  CHECK(ident.statistic == 0.0);
  CHECK(ident.pvalue == doctest::Approx(1.0));
  const KsResult differ = ks_two_sample(a, c);
  CHECK(differ.pvalue < 1e-6);
  // Half of c is shifted by 2, so the true CDF gap is 0.1.
  CHECK(differ.statistic == doctest::Approx(0.1).epsilon(0.25));
}

TEST_CASE("dkw band width") {
  CHECK(dkw_epsilon(100000, 0.05) ==
        doctest::Approx(std::sqrt(std::log(2.0 / 0.05) / (2.0 * 100000))).epsilon(1e-12));
  CHECK(dkw_epsilon(100, 1e-3) > dkw_epsilon(10000, 1e-3));
}

TEST_CASE("mean and variance") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  CHECK(mean(xs) == doctest::Approx(2.5));
  CHECK(variance(xs) == doctest::Approx(5.0 / 3.0));
}
