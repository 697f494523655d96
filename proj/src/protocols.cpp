#include "rumorperc/protocols.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace rumorperc {

std::uint32_t default_round_cap(Vertex n) {
  if (n < 1) throw std::invalid_argument("round cap: need n >= 1");
  const double raw = 8.0 * (std::log2(static_cast<double>(n)) + std::log(static_cast<double>(n)));
  return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::ceil(raw)));
}

std::vector<std::int64_t> ProtocolTrace::inform_rounds() const {
  std::vector<std::int64_t> out(n, -1);
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    for (const Vertex v : rounds[t]) out[v] = static_cast<std::int64_t>(t);
  }
  return out;
}

void ProtocolTrace::validate() const {
  if (n < 1 || start >= n) throw std::runtime_error("trace: bad start/n");
  if (rounds.empty() || rounds[0] != std::vector<Vertex>{start})
    throw std::runtime_error("trace: rounds[0] must be {start}");
  std::vector<char> seen(n, 0);
  std::size_t informed = 0;
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    const std::size_t before = informed;
    for (const Vertex v : rounds[t]) {
      if (v >= n) throw std::runtime_error("trace: vertex out of range");
      if (seen[v]) throw std::runtime_error("trace: vertex informed twice");
      seen[v] = 1;
      informed += 1;
    }
    if (t > 0 && informed > 2 * before)
      throw std::runtime_error("trace: more than doubled in one round");
  }
  if (completion_round) {
    if (censored_at) throw std::runtime_error("trace: both completed and censored");
    if (informed != n) throw std::runtime_error("trace: completed without informing all");
    if (*completion_round + 1 != rounds.size())
      throw std::runtime_error("trace: completion round mismatch");
  } else {
    if (!censored_at && n > 1) throw std::runtime_error("trace: neither completed nor censored");
    if (informed == n && n > 1) throw std::runtime_error("trace: censored but complete");
  }
}

std::string ProtocolTrace::to_json() const {
  std::ostringstream out;
  out << "{\"start\":" << start << ",\"n\":" << n << ",\"rounds\":[";
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    if (t) out << ',';
    out << '[';
    for (std::size_t i = 0; i < rounds[t].size(); ++i) {
      if (i) out << ',';
      out << rounds[t][i];
    }
    out << ']';
  }
  out << "],\"completion_round\":";
  if (completion_round) {
    out << *completion_round;
  } else {
    out << "null";
  }
  out << ",\"censored_at\":";
  if (censored_at) {
    out << *censored_at;
  } else {
    out << "null";
  }
  out << '}';
  return out.str();
}

namespace {

struct RunState {
  ProtocolTrace trace;
  std::vector<char> informed;
  std::vector<Vertex> order;  // informed vertices, oldest first
  std::uint32_t cap;

  RunState(const Graph& g, Vertex start, const RunOptions& opts) {
    const Vertex n = g.vertex_count();
    if (start >= n) throw std::invalid_argument("run: start vertex out of range");
    cap = opts.round_cap ? opts.round_cap : default_round_cap(n);
    trace.start = start;
    trace.n = n;
    trace.rounds.push_back({start});
    if (opts.record_first_choice) trace.first_choice.emplace();
    informed.assign(n, 0);
    informed[start] = 1;
    order.reserve(n);
    order.push_back(start);
    if (n == 1) trace.completion_round = 0;
  }

  bool done() const { return trace.completion_round.has_value(); }

  void record_choice(Vertex u, Vertex w, std::uint32_t t) {
    if (trace.first_choice) trace.first_choice->emplace(std::make_pair(u, w), t);
    // emplace keeps the first round; later choices of the same pair are no-ops
  }

  // Returns true when everyone is informed.
  bool finish_round(std::vector<Vertex>&& newly, std::uint32_t t) {
    trace.rounds.push_back(std::move(newly));
    if (order.size() == trace.n) {
      trace.completion_round = t;
      return true;
    }
    return false;
  }

  void censor() { trace.censored_at = cap; }
};

}  // namespace

ProtocolTrace run_push(const Graph& g, Vertex start, RngStream rng, RunOptions opts) {
  RunState st(g, start, opts);
  for (std::uint32_t t = 1; !st.done() && t <= st.cap; ++t) {
    const std::size_t frontier = st.order.size();
    std::vector<Vertex> newly;
    for (std::size_t i = 0; i < frontier; ++i) {
      const Vertex u = st.order[i];
      const auto nb = g.neighbors(u);
      if (nb.empty()) continue;
      const Vertex w = nb[rng.next_below(nb.size())];
      st.record_choice(u, w, t);
      if (!st.informed[w]) {
        st.informed[w] = 1;
        newly.push_back(w);
        st.order.push_back(w);
      }
    }
    if (st.finish_round(std::move(newly), t)) break;
  }
  if (!st.done()) st.censor();
  return st.trace;
}

ProtocolTrace run_pwr(const Graph& g, Vertex start, RngStream rng, RunOptions opts) {
  RunState st(g, start, opts);
  const Vertex n = g.vertex_count();
  // Sparse Fisher-Yates per vertex: O(choices) memory, uniform permutation
  // prefix without materializing the full neighbor copy.
  std::vector<std::uint32_t> next_k(n, 0);
  std::vector<std::unordered_map<std::uint32_t, Vertex>> moved(n);
  auto slot = [&](Vertex u, std::uint32_t idx) -> Vertex {
    const auto it = moved[u].find(idx);
    return it == moved[u].end() ? g.neighbors(u)[idx] : it->second;
  };
  for (std::uint32_t t = 1; !st.done() && t <= st.cap; ++t) {
    const std::size_t frontier = st.order.size();
    std::vector<Vertex> newly;
    for (std::size_t i = 0; i < frontier; ++i) {
      const Vertex u = st.order[i];
      const Vertex deg = g.degree(u);
      if (next_k[u] >= deg) continue;  // all neighbors already chosen
      const std::uint32_t k = next_k[u];
      const std::uint32_t j = k + static_cast<std::uint32_t>(rng.next_below(deg - k));
      const Vertex w = slot(u, j);
      if (j != k) moved[u][j] = slot(u, k);
      next_k[u] = k + 1;
      st.record_choice(u, w, t);
      if (!st.informed[w]) {
        st.informed[w] = 1;
        newly.push_back(w);
        st.order.push_back(w);
      }
    }
    if (st.finish_round(std::move(newly), t)) break;
  }
  if (!st.done()) st.censor();
  return st.trace;
}

ProtocolTrace run_with_choice_fn(
    const Graph& g, Vertex start, RunOptions opts,
    const std::function<std::optional<Vertex>(Vertex, std::uint32_t)>& choice) {
  RunState st(g, start, opts);
  std::vector<std::uint32_t> made(g.vertex_count(), 0);
  for (std::uint32_t t = 1; !st.done() && t <= st.cap; ++t) {
    const std::size_t frontier = st.order.size();
    std::vector<Vertex> newly;
    for (std::size_t i = 0; i < frontier; ++i) {
      const Vertex u = st.order[i];
      const auto w = choice(u, made[u]);
      if (!w) continue;
      made[u] += 1;
      st.record_choice(u, *w, t);
      if (!st.informed[*w]) {
        st.informed[*w] = 1;
        newly.push_back(*w);
        st.order.push_back(*w);
      }
    }
    if (st.finish_round(std::move(newly), t)) break;
  }
  if (!st.done()) st.censor();
  return st.trace;
}

ProtocolTrace run_pwr_with_orderings(const Graph& g,
                                     const std::vector<std::vector<Vertex>>& orderings,
                                     Vertex start, RunOptions opts) {
  if (orderings.size() != g.vertex_count())
    throw std::invalid_argument("run_pwr_with_orderings: one ordering per vertex required");
  RunState st(g, start, opts);
  std::vector<std::uint32_t> next_k(g.vertex_count(), 0);
  for (std::uint32_t t = 1; !st.done() && t <= st.cap; ++t) {
    const std::size_t frontier = st.order.size();
    std::vector<Vertex> newly;
    for (std::size_t i = 0; i < frontier; ++i) {
      const Vertex u = st.order[i];
      const auto& ord = orderings[u];
      if (next_k[u] >= ord.size()) continue;
      const Vertex w = ord[next_k[u]++];
      st.record_choice(u, w, t);
      if (!st.informed[w]) {
        st.informed[w] = 1;
        newly.push_back(w);
        st.order.push_back(w);
      }
    }
    if (st.finish_round(std::move(newly), t)) break;
  }
  if (!st.done()) st.censor();
  return st.trace;
}

}  // namespace rumorperc
