// cli.cpp — flag parsing and dispatch for the rumorperc tool.
#include "rumorperc/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rumorperc/couplings.hpp"
#include "rumorperc/experiments.hpp"

namespace rumorperc {
namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const std::string& text, const char* what) {
  T value{};
  const char* const first = text.data();
  const char* const last = first + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last)
    throw std::invalid_argument(std::string("bad ") + what + ": '" + text + "'");
  return value;
}

std::uint64_t resolve_seed(bool explicitly_set, std::uint64_t value) {
  if (explicitly_set) return value;
  if (const char* env = std::getenv("RUMORPERC_SEED"))
    return parse_number<std::uint64_t>(env, "RUMORPERC_SEED");
  return kDefaultSeed;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open for writing: " + path);
  file << content;
  if (!file) throw std::runtime_error("write failed: " + path);
}

// Content goes to the file when a path was given, to the stream otherwise.
void deliver(const std::string& content, const std::string& path, std::ostream& out) {
  if (path.empty())
    out << content;
  else
    write_file(path, content);
}

ExportFormat resolve_format(const std::string& format_flag, const std::string& out_path) {
  if (format_flag == "csv") return ExportFormat::kCsv;
  if (format_flag == "json") return ExportFormat::kJson;
  if (!format_flag.empty()) throw std::invalid_argument("unknown format: " + format_flag);
  return out_path.ends_with(".json") ? ExportFormat::kJson : ExportFormat::kCsv;
}

// Every vertex informed in `inner` is informed in `outer` no later.
bool informs_contained(const ProtocolTrace& inner, const ProtocolTrace& outer) {
  const auto in_rounds = inner.inform_rounds();
  const auto out_rounds = outer.inform_rounds();
  for (std::size_t v = 0; v < in_rounds.size(); ++v)
    if (in_rounds[v] >= 0 && (out_rounds[v] < 0 || out_rounds[v] > in_rounds[v])) return false;
  return true;
}

std::string opt_u32(const std::optional<std::uint32_t>& v) {
  return v ? std::to_string(*v) : "null";
}

const char* bool_str(bool b) { return b ? "true" : "false"; }

// Mean of the non-null completion rounds, "null" when all are null.
struct MeanAcc {
  double sum = 0.0;
  std::uint64_t count = 0;
  void add(const std::optional<std::uint32_t>& v) {
    if (!v) return;
    sum += *v;
    count += 1;
  }
  std::string str() const { return count == 0 ? "null" : fmt(sum / static_cast<double>(count)); }
};

struct CoupleConfig {
  std::string graph_spec;
  double p = 0.0;
  std::uint32_t T = 0;  // 0 = ceil(log2 n + ln n)
  std::uint64_t trials = 0;
  Vertex start = 0;
  std::uint32_t round_cap = 0;
  std::uint64_t seed = 0;
  std::string out_path;
};

int run_couple(const CoupleConfig& cfg, std::ostream& out) {
  const Graph g = make_graph(cfg.graph_spec, cfg.seed);
  const Vertex n = g.vertex_count();
  if (cfg.start >= n) throw std::invalid_argument("couple: start out of range");
  const auto d = g.regular_degree();
  if (!d || *d == 0)
    throw std::invalid_argument("couple requires a regular graph of positive degree; got '" +
                                cfg.graph_spec + "'");
  const std::uint32_t T =
      cfg.T != 0 ? cfg.T
                 : static_cast<std::uint32_t>(std::ceil(std::log2(double(n)) + std::log(double(n))));
  const EdgeCouplingParams params = EdgeCouplingParams::make(*d, cfg.p, T);

  RngStream root(cfg.seed, 0);
  const auto theta_root = root.substream(streams::kRun);
  const auto perc_root = root.substream(streams::kPercolation);
  const auto ord_root = root.substream(streams::kOrdering);
  RunOptions ropts;
  ropts.round_cap = cfg.round_cap;
  const std::uint32_t effective_cap = ropts.round_cap ? ropts.round_cap : default_round_cap(n);

  std::uint64_t containment_violations = 0, ordering_violations = 0, rank_violations = 0,
                perc_censored = 0, in_lower = 0, in_upper = 0, lower_half = 0, upper_half = 0,
                lower_t = 0;
  MeanAcc push_mean, pwr_mean, pwr_ord_mean, pwr_perc_mean;

  std::string runs;
  for (std::uint64_t i = 0; i < cfg.trials; ++i) {
    const auto [push_trace, pwr_trace] =
        run_coupled_push_pwr(g, cfg.start, theta_root.substream(i), ropts);
    const bool contained = informs_contained(push_trace, pwr_trace);
    const EdgeIndicatorCoupling coupling(g, cfg.p, T, perc_root.substream(i));
    const CoupledPwrRun run = run_coupled_pwr(coupling, cfg.start, ord_root.substream(i), ropts);

    containment_violations += contained ? 0 : 1;
    ordering_violations += run.ordering_consistent ? 0 : 1;
    rank_violations += run.rank_excess_ok ? 0 : 1;
    in_lower += run.base_choices_within_lower ? 1 : 0;
    in_upper += run.perc_choices_within_upper ? 1 : 0;
    perc_censored += run.trace_perc.censored_at ? 1 : 0;
    lower_half += run.all_lower_above_ct_half ? 1 : 0;
    upper_half += run.all_upper_above_ct_half ? 1 : 0;
    lower_t += run.all_lower_above_T ? 1 : 0;
    push_mean.add(push_trace.completion_round);
    pwr_mean.add(pwr_trace.completion_round);
    pwr_ord_mean.add(run.trace_base.completion_round);
    pwr_perc_mean.add(run.trace_perc.completion_round);

    runs += std::string(i == 0 ? "" : ",") + "{\"push_g\":" + opt_u32(push_trace.completion_round) +
            ",\"pwr_g\":" + opt_u32(pwr_trace.completion_round) +
            ",\"containment_ok\":" + bool_str(contained) +
            ",\"pwr_g_ord\":" + opt_u32(run.trace_base.completion_round) +
            ",\"pwr_gp_ord\":" + opt_u32(run.trace_perc.completion_round) +
            ",\"ordering_ok\":" + bool_str(run.ordering_consistent) +
            ",\"rank_excess_ok\":" + bool_str(run.rank_excess_ok) +
            ",\"choices_in_lower\":" + bool_str(run.base_choices_within_lower) +
            ",\"choices_in_upper\":" + bool_str(run.perc_choices_within_upper) +
            ",\"lower_above_ct_half\":" + bool_str(run.all_lower_above_ct_half) +
            ",\"upper_above_ct_half\":" + bool_str(run.all_upper_above_ct_half) +
            ",\"lower_above_T\":" + bool_str(run.all_lower_above_T) +
            ",\"perc_censored\":" + bool_str(run.trace_perc.censored_at.has_value()) + "}";
  }

  // Construction invariants gate the exit status; the choice-range and
  // subset-size flags are per-run observations and only get reported.
  const std::uint64_t hard_violations =
      containment_violations + ordering_violations + rank_violations;
  const auto rate = [&](std::uint64_t count) {
    return fmt(static_cast<double>(count) / static_cast<double>(cfg.trials));
  };

  std::string text = "{\"graph\":\"" + cfg.graph_spec + "\",\"start\":" + std::to_string(cfg.start) +
                     ",\"p\":" + fmt(cfg.p) + ",\"T\":" + std::to_string(T) +
                     ",\"trials\":" + std::to_string(cfg.trials) +
                     ",\"round_cap\":" + std::to_string(effective_cap) +
                     ",\"seed\":" + std::to_string(cfg.seed) +
                     ",\"params\":{\"d\":" + std::to_string(params.d) + ",\"C\":" + fmt(params.C) +
                     ",\"r\":" + fmt(params.r) + ",\"upper\":" + fmt(params.upper) +
                     ",\"q\":" + fmt(params.q) + ",\"q_flat\":" + fmt(params.q_flat) +
                     ",\"excess\":" + fmt(params.excess) + ",\"delta\":" + fmt(params.delta) +
                     "},\"runs\":[" + runs + "],\"aggregate\":{" +
                     "\"containment_violations\":" + std::to_string(containment_violations) +
                     ",\"ordering_violations\":" + std::to_string(ordering_violations) +
                     ",\"rank_violations\":" + std::to_string(rank_violations) +
                     ",\"hard_violations\":" + std::to_string(hard_violations) +
                     ",\"perc_censored\":" + std::to_string(perc_censored) +
                     ",\"push_g_mean\":" + push_mean.str() + ",\"pwr_g_mean\":" + pwr_mean.str() +
                     ",\"pwr_g_ord_mean\":" + pwr_ord_mean.str() +
                     ",\"pwr_gp_ord_mean\":" + pwr_perc_mean.str() +
                     ",\"choices_in_lower_rate\":" + rate(in_lower) +
                     ",\"choices_in_upper_rate\":" + rate(in_upper) +
                     ",\"lower_above_ct_half_rate\":" + rate(lower_half) +
                     ",\"upper_above_ct_half_rate\":" + rate(upper_half) +
                     ",\"lower_above_T_rate\":" + rate(lower_t) + "}}\n";

  deliver(text, cfg.out_path, out);
  return hard_violations == 0 ? 0 : 1;
}

}  // namespace

Graph make_graph(const std::string& spec, std::uint64_t seed) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  if (kind == "complete") return Graph::complete(parse_number<Vertex>(rest, "vertex count"));
  if (kind == "hypercube") return Graph::hypercube(parse_number<unsigned>(rest, "dimension"));
  if (kind == "random-regular") {
    const auto comma = rest.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("random-regular needs N,D, e.g. random-regular:100,10; got '" +
                                  spec + "'");
    return Graph::random_regular(parse_number<Vertex>(rest.substr(0, comma), "vertex count"),
                                 parse_number<Vertex>(rest.substr(comma + 1), "degree"), seed);
  }
  if (kind == "edgelist") {
    std::ifstream in(rest);
    if (!in) throw std::invalid_argument("cannot open edge list: " + rest);
    return Graph::load_edge_list(in);
  }
  throw std::invalid_argument(
      "unknown graph spec '" + spec +
      "' (expected complete:N, hypercube:D, random-regular:N,D, or edgelist:PATH)");
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"rumor spreading on graphs and their bond percolations", "rumorperc"};
  app.require_subcommand(1);
  const std::string footer =
      "Seed precedence: --seed, then env RUMORPERC_SEED, then the fixed default "
      "0x52756d6f72. Identical invocations (same seed) produce byte-identical output.\n"
      "Sweep CSV schema: p,pd_over_T,t_g_q50,t_g_q95,t_gp_q50,t_gp_q95,ratio_95,"
      "disconnect_rate,trials,seed";
  app.footer(footer);

  const std::string graph_help =
      "graph spec: complete:N, hypercube:D, random-regular:N,D, or edgelist:PATH";
  const std::string seed_help = "master seed (default: RUMORPERC_SEED env, else 0x52756d6f72)";

  // gen-graph
  auto* gen = app.add_subcommand("gen-graph", "write a graph as an edge list");
  std::string gen_spec, gen_out;
  std::uint64_t gen_seed = 0;
  gen->add_option("--graph", gen_spec, graph_help)->required();
  gen->add_option("--out", gen_out, "output path (default: stdout)");
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, seed_help);
  gen->footer(footer);

  // simulate
  auto* sim = app.add_subcommand("simulate", "estimate runtime quantiles for one protocol");
  std::string sim_spec, sim_protocol = "push", sim_out;
  std::uint64_t sim_trials = 0, sim_seed = 0;
  double sim_p = 0.0;
  std::uint32_t sim_round_cap = 0;
  Vertex sim_start = 0;
  unsigned sim_workers = 1;
  sim->add_option("--graph", sim_spec, graph_help)->required();
  sim->add_option("--protocol", sim_protocol, "push or pwr")
      ->check(CLI::IsMember({"push", "pwr"}))
      ->capture_default_str();
  sim->add_option("--trials", sim_trials, "number of runs (at least 100)")->required();
  auto* sim_p_opt =
      sim->add_option("--p", sim_p, "percolate with this retention probability, fresh per trial");
  sim->add_option("--round-cap", sim_round_cap, "censor runs at this round (default: 8(log2 n + ln n))");
  sim->add_option("--start", sim_start, "start vertex")->capture_default_str();
  sim->add_option("--workers", sim_workers, "worker threads")->capture_default_str();
  sim->add_option("--out", sim_out, "output path for the summary JSON (default: stdout)");
  auto* sim_seed_opt = sim->add_option("--seed", sim_seed, seed_help);
  sim->footer(footer);

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "push runtime ratio T(G_p)/T(G) across a grid of percolation probabilities");
  std::string sweep_spec, sweep_out, sweep_format, sweep_config;
  std::vector<double> sweep_p;
  std::uint64_t sweep_trials = 0, sweep_seed = 0;
  double sweep_eps = 0.1, sweep_level = 0.95;
  std::uint32_t sweep_round_cap = 0;
  Vertex sweep_start = 0;
  unsigned sweep_workers = 1;
  auto* sweep_graph_opt = sweep->add_option("--graph", sweep_spec, graph_help);
  auto* sweep_p_opt =
      sweep->add_option("--p", sweep_p, "comma-separated retention probabilities, e.g. 0.5,1.0")
          ->delimiter(',');
  auto* sweep_trials_opt = sweep->add_option("--trials", sweep_trials, "runs per row (at least 100)");
  auto* sweep_eps_opt =
      sweep->add_option("--eps", sweep_eps, "target slack for the quantile ratio, recorded in the output")
          ->capture_default_str();
  auto* sweep_level_opt =
      sweep->add_option("--quantile-level", sweep_level, "quantile compared across rows")
          ->capture_default_str();
  auto* sweep_cap_opt = sweep->add_option("--round-cap", sweep_round_cap,
                                          "censor runs at this round (default: 8(log2 n + ln n))");
  auto* sweep_start_opt = sweep->add_option("--start", sweep_start, "start vertex")->capture_default_str();
  auto* sweep_workers_opt =
      sweep->add_option("--workers", sweep_workers, "worker threads")->capture_default_str();
  auto* sweep_out_opt = sweep->add_option("--out", sweep_out, "output path (default: stdout)");
  auto* sweep_format_opt =
      sweep->add_option("--format", sweep_format, "csv or json (default: by --out extension, else csv)")
          ->check(CLI::IsMember({"csv", "json"}));
  auto* sweep_seed_opt = sweep->add_option("--seed", sweep_seed, seed_help);
  sweep->add_option("--config", sweep_config,
                    "JSON file mirroring the flags (graph, p, trials, eps, quantile_level, "
                    "round_cap, start, workers, seed, out, format); explicit flags win");
  sweep->footer(footer);

  // verify
  auto* verify = app.add_subcommand("verify", "run a distributional verification suite");
  std::string verify_suite_name, verify_out;
  double verify_budget = 1.0;
  std::uint64_t verify_seed = 0;
  verify->add_option("--suite", verify_suite_name, "dominance, tailbound, claim, coupling, or all")
      ->required()
      ->check(CLI::IsMember({"dominance", "tailbound", "claim", "coupling", "all"}));
  verify->add_option("--budget", verify_budget, "sample-size multiplier applied to every check")
      ->capture_default_str();
  verify->add_option("--out", verify_out, "output path for the report JSON (default: stdout)");
  auto* verify_seed_opt = verify->add_option("--seed", verify_seed, seed_help);
  verify->footer(footer);

  // couple
  auto* couple = app.add_subcommand(
      "couple", "per-run records of the push/PWR coupling and the percolation edge coupling");
  CoupleConfig cc;
  std::uint64_t couple_seed = 0;
  couple->add_option("--graph", cc.graph_spec, graph_help + " (must be regular)")->required();
  couple->add_option("--p", cc.p, "edge retention probability")->required();
  couple->add_option("--T", cc.T, "round budget of the edge coupling (default: ceil(log2 n + ln n))");
  couple->add_option("--trials", cc.trials, "number of coupled runs")
      ->required()
      ->check(CLI::PositiveNumber);
  couple->add_option("--start", cc.start, "start vertex")->capture_default_str();
  couple->add_option("--round-cap", cc.round_cap,
                     "censor runs at this round (default: 8(log2 n + ln n))");
  couple->add_option("--out", cc.out_path, "output path (default: stdout)");
  auto* couple_seed_opt = couple->add_option("--seed", couple_seed, seed_help);
  couple->footer(footer);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      const auto seed = resolve_seed(gen_seed_opt->count() > 0, gen_seed);
      const Graph g = make_graph(gen_spec, seed);
      std::ostringstream text;
      g.dump_edge_list(text);
      deliver(text.str(), gen_out, out);
      return 0;
    }
    if (*sim) {
      const auto seed = resolve_seed(sim_seed_opt->count() > 0, sim_seed);
      const Graph g = make_graph(sim_spec, seed);
      RngStream root(seed, 0);
      RuntimeOptions opts;
      opts.round_cap = sim_round_cap;
      opts.workers = sim_workers;
      opts.graph_desc = sim_spec;
      const Protocol protocol = parse_protocol(sim_protocol).value();
      const RuntimeSummary summary =
          sim_p_opt->count() > 0
              ? estimate_runtime_percolated(g, sim_p, sim_start, protocol, sim_trials, root, opts)
              : estimate_runtime(g, sim_start, protocol, sim_trials, root, opts);
      deliver(summary.to_json() + "\n", sim_out, out);
      return 0;
    }
    if (*sweep) {
      bool seed_in_config = false;
      if (!sweep_config.empty()) {
        std::ifstream in(sweep_config);
        if (!in) throw std::invalid_argument("cannot open config: " + sweep_config);
        try {
          const auto j = nlohmann::json::parse(in);
          const auto unset = [](const CLI::Option* o) { return o->count() == 0; };
          if (unset(sweep_graph_opt) && j.contains("graph"))
            sweep_spec = j.at("graph").get<std::string>();
          if (unset(sweep_p_opt) && j.contains("p"))
            sweep_p = j.at("p").get<std::vector<double>>();
          if (unset(sweep_trials_opt) && j.contains("trials"))
            sweep_trials = j.at("trials").get<std::uint64_t>();
          if (unset(sweep_eps_opt) && j.contains("eps")) sweep_eps = j.at("eps").get<double>();
          if (unset(sweep_level_opt) && j.contains("quantile_level"))
            sweep_level = j.at("quantile_level").get<double>();
          if (unset(sweep_cap_opt) && j.contains("round_cap"))
            sweep_round_cap = j.at("round_cap").get<std::uint32_t>();
          if (unset(sweep_start_opt) && j.contains("start")) sweep_start = j.at("start").get<Vertex>();
          if (unset(sweep_workers_opt) && j.contains("workers"))
            sweep_workers = j.at("workers").get<unsigned>();
          if (unset(sweep_seed_opt) && j.contains("seed")) {
            sweep_seed = j.at("seed").get<std::uint64_t>();
            seed_in_config = true;
          }
          if (unset(sweep_out_opt) && j.contains("out")) sweep_out = j.at("out").get<std::string>();
          if (unset(sweep_format_opt) && j.contains("format"))
            sweep_format = j.at("format").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
          throw std::invalid_argument("config error in " + sweep_config + ": " + e.what());
        }
      }
      if (sweep_spec.empty()) throw std::invalid_argument("missing --graph (or config key 'graph')");
      if (sweep_p.empty()) throw std::invalid_argument("missing --p (or config key 'p')");
      if (sweep_trials == 0) throw std::invalid_argument("missing --trials (or config key 'trials')");
      const ExportFormat format = resolve_format(sweep_format, sweep_out);
      const auto seed = resolve_seed(sweep_seed_opt->count() > 0 || seed_in_config, sweep_seed);
      const Graph g = make_graph(sweep_spec, seed);
      RngStream root(seed, 0);
      SweepOptions opts;
      opts.quantile_level = sweep_level;
      opts.round_cap = sweep_round_cap;
      opts.workers = sweep_workers;
      opts.graph_desc = sweep_spec;
      const SweepResult result =
          robustness_sweep(g, sweep_start, sweep_p, sweep_eps, sweep_trials, root, opts);
      deliver(format == ExportFormat::kCsv ? result.to_csv() : result.to_json() + "\n", sweep_out,
              out);
      return 0;
    }
    if (*verify) {
      const auto seed = resolve_seed(verify_seed_opt->count() > 0, verify_seed);
      const VerificationReport report =
          verify_suite(parse_suite(verify_suite_name).value(), verify_budget, RngStream(seed, 0));
      deliver(report.to_json() + "\n", verify_out, out);
      return report.all_passed() ? 0 : 1;
    }
    if (*couple) {
      cc.seed = resolve_seed(couple_seed_opt->count() > 0, couple_seed);
      return run_couple(cc, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;  // unreachable with require_subcommand(1)
}

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_command(args, out, err);
}

}  // namespace rumorperc
