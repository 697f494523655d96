#include "rumorperc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rumorperc::stats {

namespace {

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x), valid for x >= a + 1 (modified Lentz).
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_pvalue(double stat, int df) {
  if (df < 1) throw std::invalid_argument("chi_square_pvalue: need df >= 1");
  if (stat <= 0.0) return 1.0;
  return gamma_q(static_cast<double>(df) / 2.0, stat / 2.0);
}

GofResult chi_square_gof(const std::vector<double>& expected_probs,
                         const std::vector<std::int64_t>& observed_counts,
                         std::int64_t observed_tail, double min_expected) {
  if (expected_probs.size() != observed_counts.size())
    throw std::invalid_argument("chi_square_gof: size mismatch");
  std::int64_t total = observed_tail;
  for (const auto c : observed_counts) total += c;
  if (total <= 0) throw std::invalid_argument("chi_square_gof: no observations");

  double tail_prob = 1.0;
  for (const auto p : expected_probs) tail_prob -= p;
  tail_prob = std::max(tail_prob, 0.0);

  // Cells in order, tail appended last; merge forward until each merged cell
  // has enough expected mass.
  std::vector<std::pair<double, double>> cells;  // (expected, observed)
  double exp_acc = 0.0;
  double obs_acc = 0.0;
  for (std::size_t i = 0; i < expected_probs.size(); ++i) {
    exp_acc += expected_probs[i] * static_cast<double>(total);
    obs_acc += static_cast<double>(observed_counts[i]);
    if (exp_acc >= min_expected) {
      cells.emplace_back(exp_acc, obs_acc);
      exp_acc = 0.0;
      obs_acc = 0.0;
    }
  }
  exp_acc += tail_prob * static_cast<double>(total);
  obs_acc += static_cast<double>(observed_tail);
  if (exp_acc > 0.0 || obs_acc > 0.0) {
    if (!cells.empty() && exp_acc < min_expected) {
      cells.back().first += exp_acc;
      cells.back().second += obs_acc;
    } else {
      cells.emplace_back(exp_acc, obs_acc);
    }
  }
  if (cells.size() < 2) throw std::invalid_argument("chi_square_gof: fewer than 2 usable cells");

  GofResult out;
  out.bins = static_cast<int>(cells.size());
  for (const auto& [e, o] : cells) {
    const double diff = o - e;
    out.statistic += diff * diff / e;
  }
  out.df = out.bins - 1;
  out.pvalue = chi_square_pvalue(out.statistic, out.df);
  return out;
}

GofResult chi_square_independence(const std::vector<std::vector<std::int64_t>>& table) {
  if (table.size() < 2 || table[0].size() < 2)
    throw std::invalid_argument("chi_square_independence: need a 2x2 table at least");
  const std::size_t rows = table.size();
  const std::size_t cols = table[0].size();
  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (table[r].size() != cols) throw std::invalid_argument("chi_square_independence: ragged table");
    for (std::size_t c = 0; c < cols; ++c) {
      row_sum[r] += static_cast<double>(table[r][c]);
      col_sum[c] += static_cast<double>(table[r][c]);
      total += static_cast<double>(table[r][c]);
    }
  }
  if (total <= 0.0) throw std::invalid_argument("chi_square_independence: empty table");
  GofResult out;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double e = row_sum[r] * col_sum[c] / total;
      if (e <= 0.0) continue;
      const double diff = static_cast<double>(table[r][c]) - e;
      out.statistic += diff * diff / e;
    }
  }
  out.df = static_cast<int>((rows - 1) * (cols - 1));
  out.bins = static_cast<int>(rows * cols);
  out.pvalue = chi_square_pvalue(out.statistic, out.df);
  return out;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    const double x = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    d = std::max(d, std::fabs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double q = 0.0;
  double sign = 1.0;
  bool converged = false;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * lam * lam * static_cast<double>(j) * j);
    q += sign * term;
    sign = -sign;
    if (term < 1e-12) {
      converged = true;
      break;
    }
  }
  KsResult out;
  out.statistic = d;
  // The alternating series only stalls for lam < ~0.04, where Q is 1 to
  // within 1e-12 anyway.
  out.pvalue = converged ? std::clamp(2.0 * q, 0.0, 1.0) : 1.0;
  return out;
}

double dkw_epsilon(std::size_t m, double alpha) {
  if (m == 0 || !(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("dkw_epsilon: need m >= 1 and alpha in (0, 1)");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(m)));
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty");
  double acc = 0.0;
  for (const double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

double variance(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::invalid_argument("variance: need >= 2 values");
  const double m = mean(xs);
  double acc = 0.0;
  for (const double x : xs) acc += (x - m) * (x - m);
  return acc / static_cast<double>(xs.size() - 1);
}

}  // namespace rumorperc::stats
