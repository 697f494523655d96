#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "rumorperc/exact_dominance.hpp"
#include "rumorperc/stochastic.hpp"

using namespace rumorperc;
using namespace rumorperc::exactdom;

TEST_CASE("rational pmf matches the floating point pmf") {
  for (const std::uint32_t N : {5u, 12u, 30u, 60u}) {
    for (const std::uint32_t d : {1u, N / 3, N - 1}) {
      for (const std::uint32_t r : {1u, (d + 1) / 2, d}) {
        const NhParams params{N, d, r};
        for (std::int64_t k = params.support_min(); k <= params.support_max(); ++k) {
          const double exact = nh_pmf_exact(N, d, r, k).get_d();
          REQUIRE(nh_pmf(params, k) == doctest::Approx(exact).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("rational pmf sums to exactly one") {
  for (const auto& [N, d, r] :
       {std::tuple{12u, 8u, 3u}, std::tuple{30u, 7u, 7u}, std::tuple{25u, 24u, 1u}}) {
    mpq_class sum = 0;
    for (std::int64_t k = r; k <= static_cast<std::int64_t>(N - d + r); ++k)
      sum += nh_pmf_exact(N, d, r, k);
    CHECK(sum == mpq_class(1));
  }
}

TEST_CASE("rational pmf vanishes off the support") {
  CHECK(nh_pmf_exact(10, 4, 2, 1) == 0);
  CHECK(nh_pmf_exact(10, 4, 2, 9) == 0);
}

TEST_CASE("single instance checks pass") {
  CHECK(check_first_pick(1, 1).ok);
  CHECK(check_first_pick(30, 30).ok);
  CHECK(check_rank(8, 5, 3).ok);
  CHECK(check_rank_pair(8, 5, 3, 2).ok);
  CHECK(check_rank_pair(8, 5, 2, 3).ok);
}

TEST_CASE("rank checks reject out-of-range ranks") {
  CHECK_THROWS_AS(check_rank(5, 5, 5), std::invalid_argument);
  CHECK_THROWS_AS(check_rank(5, 5, 0), std::invalid_argument);
  CHECK_THROWS_AS(check_rank_pair(5, 5, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(check_rank_pair(5, 5, 1, 0), std::invalid_argument);
}

TEST_CASE("dominance grids are clean") {
  const GridReport first = run_first_pick_grid(12);
  CHECK(first.clean());
  CHECK(first.checks_run == 144);

  const GridReport rank = run_rank_grid(12);
  CHECK(rank.clean());
  CHECK(rank.checks_run == 12 * 66);  // sum over k1 of (k1 - 1), times 12 choices of k2

  const GridReport pair = run_rank_pair_grid(8, 3);
  CHECK(pair.clean());
  CHECK(pair.violations == 0);
  CHECK(pair.first_violation.empty());
}

TEST_CASE("grid report clean() requires work") {
  CHECK_FALSE(GridReport{}.clean());
}
