// experiments.hpp — Monte Carlo harnesses: runtime quantile estimation on a
// graph and under bond percolation, the percolation robustness sweep, the
// named verification suites, and byte-stable CSV/JSON export.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rumorperc/graph.hpp"
#include "rumorperc/protocols.hpp"
#include "rumorperc/rng.hpp"

namespace rumorperc {

enum class Protocol { kPush, kPwr };

std::string_view protocol_name(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view name);

// Empirical runtime distribution over independent trials. Runs stopped at
// the round cap on a graph the rumor could have covered are counted at the
// cap; runs the start vertex could never cover (disconnection) are excluded
// from quantiles and mean, and only show up in the two fractions. When every
// trial is disconnection-censored the quantiles and mean are null.
struct RuntimeSummary {
  static constexpr std::array<double, 4> kLevels = {0.5, 0.9, 0.95, 0.99};

  std::string graph;  // descriptor, e.g. "complete:512"; informational
  Vertex start = 0;
  Protocol protocol = Protocol::kPush;
  std::uint32_t trials = 0;
  std::optional<double> p;  // per-trial percolation, when used
  std::uint32_t round_cap = 0;
  std::uint64_t master_seed = 0;
  std::array<std::optional<double>, 4> quantiles;  // aligned with kLevels
  std::optional<double> mean;
  double censored_fraction = 0.0;      // stopped at the cap, either reason
  double disconnected_fraction = 0.0;  // start's component was not the whole graph

  // Value at one of the four fixed levels; nullopt for any other level.
  std::optional<double> quantile(double level) const;

  bool operator==(const RuntimeSummary&) const = default;

  std::string to_json() const;
  static RuntimeSummary from_json(const std::string& text);
};

struct RuntimeOptions {
  std::uint32_t round_cap = 0;  // 0 = default_round_cap(n)
  std::uint32_t workers = 1;
  std::string graph_desc;  // recorded in RuntimeSummary::graph
};

// Runs `trials` independent protocol executions on g (trial i draws from
// rng.substream(kRun).substream(i)) and summarizes. trials >= 100.
RuntimeSummary estimate_runtime(const Graph& g, Vertex start, Protocol protocol,
                                std::uint32_t trials, RngStream rng,
                                const RuntimeOptions& opts = {});

// Same, but each trial runs on a fresh percolation of base: trial i keeps
// edges via rng.substream(kPercolation).substream(i) and runs via
// rng.substream(kRun).substream(i).
RuntimeSummary estimate_runtime_percolated(const Graph& base, double p, Vertex start,
                                           Protocol protocol, std::uint32_t trials, RngStream rng,
                                           const RuntimeOptions& opts = {});

// One percolation level of a robustness sweep.
struct SweepRow {
  double p = 0.0;
  double pd_over_T = 0.0;       // p * d / T with T the baseline quantile
  bool outside_regime = false;  // pd_over_T < kRegimeThreshold
  std::optional<double> ratio;  // percolated quantile / baseline quantile; null
                                // when every percolated run was disconnected
  double disconnect_rate = 0.0;
  RuntimeSummary summary;  // the percolated runs at this p

  bool operator==(const SweepRow&) const = default;
};

// Push-runtime robustness under percolation. The baseline quantile at
// quantile_level defines T; each row reruns the same trial run-streams on
// fresh percolation samples, so the p = 1 row reproduces the baseline runs
// exactly and its ratio is exactly 1.
struct SweepResult {
  static constexpr double kRegimeThreshold = 4.0;

  double eps = 0.0;  // target allowance, recorded; rows report observed ratios
  double quantile_level = 0.95;
  std::uint64_t master_seed = 0;
  RuntimeSummary baseline;
  std::vector<SweepRow> rows;  // sorted by p

  bool operator==(const SweepResult&) const = default;

  // Columns: p,pd_over_T,t_g_q50,t_g_q95,t_gp_q50,t_gp_q95,ratio_95,
  // disconnect_rate,trials,seed. Null quantiles/ratios print as empty cells.
  std::string to_csv() const;
  std::string to_json() const;
  static SweepResult from_json(const std::string& text);
};

struct SweepOptions {
  double quantile_level = 0.95;  // defines T and the reported ratio
  std::uint32_t round_cap = 0;
  std::uint32_t workers = 1;
  std::string graph_desc;
};

// g must be regular and fully reachable from start; p_grid values in (0, 1]
// are processed in ascending order. trials >= 100 per row.
SweepResult robustness_sweep(const Graph& g, Vertex start, std::vector<double> p_grid, double eps,
                             std::uint32_t trials, RngStream rng, const SweepOptions& opts = {});

enum class ExportFormat { kCsv, kJson };

// Writes a byte-stable serialization; same result, same bytes.
void export_results(const SweepResult& result, const std::string& path, ExportFormat format);
void export_results(const RuntimeSummary& result, const std::string& path, ExportFormat format);

// One named check of a verification suite. Non-gating entries are reported
// for inspection but do not fail the suite (used where a source's two stated
// parameter values disagree and only one is sampled from).
struct CheckResult {
  std::string name;
  bool pass = false;
  bool gating = true;
  double statistic = 0.0;  // p-value, max deviation, or violation count
  std::string detail;
};

struct VerificationReport {
  std::uint64_t master_seed = 0;
  double budget = 1.0;
  std::vector<CheckResult> entries;

  bool all_passed() const;  // over gating entries
  std::string to_json() const;
};

enum class VerifySuite { kDominance, kTailBound, kClaim, kCoupling, kAll };

std::optional<VerifySuite> parse_suite(std::string_view name);

// Runs the requested suite(s); budget scales Monte Carlo sample counts.
// Failures are report entries, not exceptions.
VerificationReport verify_suite(VerifySuite which, double budget, RngStream rng);

}  // namespace rumorperc
