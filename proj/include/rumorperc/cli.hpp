// cli.hpp — command-line front end: graph generation, single runs, sweeps,
// verification suites, and coupling demonstrations.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rumorperc/graph.hpp"

namespace rumorperc {

// Fixed default master seed (the bytes of "Rumor"). The RUMORPERC_SEED
// environment variable overrides it; an explicit --seed flag overrides both.
inline constexpr std::uint64_t kDefaultSeed = 0x52756d6f72ull;

// Builds a graph from a spec string: complete:N, hypercube:D,
// random-regular:N,D, or edgelist:PATH. random-regular wires itself from
// `seed`, so spec plus master seed pins the graph.
Graph make_graph(const std::string& spec, std::uint64_t seed);

// Parses and dispatches one invocation; args excludes the program name.
// Returns 0 on success, 1 on verification or coupling-invariant failures,
// 2 on usage or input errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rumorperc
