// protocols.hpp — synchronous rumor spreading by push, with and without
// replacement.
//
// Round semantics: I(0) = {start}. In round t >= 1 every vertex informed by
// the end of round t-1 makes one choice; a vertex informed in round t makes
// its first choice in round t+1. Push picks a uniformly random neighbor each
// round (repeats allowed). Push-without-replacement walks a uniformly random
// permutation of the neighbor list, one entry per round, and stops choosing
// after deg(u) rounds.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rumorperc/graph.hpp"
#include "rumorperc/rng.hpp"

namespace rumorperc {

struct ProtocolTrace {
  Vertex start = 0;
  Vertex n = 0;
  // rounds[t] = vertices first informed in round t; rounds[0] = {start}.
  std::vector<std::vector<Vertex>> rounds;
  std::optional<std::uint32_t> completion_round;
  std::optional<std::uint32_t> censored_at;
  // (u, w) -> first round in which u chose w. Only filled on request.
  std::optional<std::map<std::pair<Vertex, Vertex>, std::uint32_t>> first_choice;

  // Round each vertex was informed, -1 if never.
  std::vector<std::int64_t> inform_rounds() const;
  // Checks disjointness, membership bounds, the per-round doubling bound
  // |I(t+1)| <= 2 |I(t)|, and completion consistency. Throws on violation.
  void validate() const;
  std::string to_json() const;
};

struct RunOptions {
  std::uint32_t round_cap = 0;  // 0 = default_round_cap(n)
  bool record_first_choice = false;
};

// ceil(8 (log2 n + ln n)), at least 1.
std::uint32_t default_round_cap(Vertex n);

ProtocolTrace run_push(const Graph& g, Vertex start, RngStream rng, RunOptions opts = {});
ProtocolTrace run_pwr(const Graph& g, Vertex start, RngStream rng, RunOptions opts = {});

inline ProtocolTrace run_push(const PercolationSample& s, Vertex start, RngStream rng,
                              RunOptions opts = {}) {
  return run_push(s.graph(), start, rng, opts);
}
inline ProtocolTrace run_pwr(const PercolationSample& s, Vertex start, RngStream rng,
                             RunOptions opts = {}) {
  return run_pwr(s.graph(), start, rng, opts);
}

// Runs the without-replacement protocol with fixed per-vertex neighbor
// orderings instead of fresh uniform permutations: vertex u's k-th choice is
// orderings[u][k-1]. Orderings may cover any prefix length; u stops choosing
// when its ordering is exhausted.
ProtocolTrace run_pwr_with_orderings(const Graph& g,
                                     const std::vector<std::vector<Vertex>>& orderings,
                                     Vertex start, RunOptions opts = {});

// Generic round loop for externally driven choices: choice(u, k) is vertex
// u's k-th choice (k counts u's previous choices, from 0), or nullopt when u
// makes no further choices. Used by the coupled runs.
ProtocolTrace run_with_choice_fn(
    const Graph& g, Vertex start, RunOptions opts,
    const std::function<std::optional<Vertex>(Vertex, std::uint32_t)>& choice);

}  // namespace rumorperc
