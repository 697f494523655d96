// stats.hpp — test statistics used by the verification suites: chi-square
// goodness of fit with automatic bin merging, two-sample Kolmogorov-Smirnov,
// and DKW confidence bands for empirical survival functions.
#pragma once

#include <cstdint>
#include <vector>

namespace rumorperc::stats {

// Upper regularized incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
double gamma_q(double a, double x);

// P(Chi2_df >= stat).
double chi_square_pvalue(double stat, int df);

struct GofResult {
  double statistic = 0.0;
  int df = 0;
  double pvalue = 1.0;
  int bins = 0;
};

// Pearson chi-square of observed counts against expected probabilities over
// the same cells. Probabilities may sum to less than 1; the remainder forms
// an implicit tail cell whose observed count is `observed_tail`. Adjacent
// cells are merged until every expected count is >= min_expected.
GofResult chi_square_gof(const std::vector<double>& expected_probs,
                         const std::vector<std::int64_t>& observed_counts,
                         std::int64_t observed_tail = 0, double min_expected = 5.0);

// Chi-square independence test on a contingency table (rows x cols).
GofResult chi_square_independence(const std::vector<std::vector<std::int64_t>>& table);

// Two-sample KS on integer samples (sorted or not). Ties are handled by
// evaluating both ECDFs on the merged support; for discrete data the test is
// conservative.
struct KsResult {
  double statistic = 0.0;
  double pvalue = 1.0;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// One-sided DKW band half-width: with probability >= 1 - alpha the empirical
// CDF of m samples stays within this distance of the truth.
double dkw_epsilon(std::size_t m, double alpha);

double mean(const std::vector<double>& xs);
double variance(const std::vector<double>& xs);  // unbiased

}  // namespace rumorperc::stats
