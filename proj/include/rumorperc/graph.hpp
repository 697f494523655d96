// graph.hpp — simple undirected graphs, generators, and bond percolation.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rumorperc/rng.hpp"

namespace rumorperc {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;  // canonical: first < second

// Simple undirected graph in CSR form. Invariants, checked on construction:
// no self-loops, no duplicate edges, every neighbor list sorted, adjacency
// symmetric. regular_degree() is set iff all degrees are equal.
class Graph {
 public:
  static Graph from_edges(Vertex n, const std::vector<Edge>& edges);
  static Graph complete(Vertex n);
  static Graph hypercube(unsigned dim);
  // Pairing model with per-pair redraw and whole-sample restart when the
  // remaining cells admit no valid pair; restart cap 10^4.
  static Graph random_regular(Vertex n, Vertex d, std::uint64_t seed);

  Vertex vertex_count() const { return n_; }
  std::size_t edge_count() const { return targets_.size() / 2; }
  Vertex degree(Vertex v) const {
    return static_cast<Vertex>(offsets_[v + 1] - offsets_[v]);
  }
  std::span<const Vertex> neighbors(Vertex v) const {
    return {targets_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::optional<Vertex> regular_degree() const { return regular_degree_; }
  bool has_edge(Vertex u, Vertex v) const;

  // Edges in canonical order: ascending (u, v) with u < v.
  std::vector<Edge> edges() const;

  // Text format: "n m" then one "u v" line per edge, 0-based ids.
  void dump_edge_list(std::ostream& out) const;
  static Graph load_edge_list(std::istream& in);

  bool operator==(const Graph& other) const {
    return n_ == other.n_ && offsets_ == other.offsets_ && targets_ == other.targets_;
  }

 private:
  friend class PercolationSample;
  friend class EdgeIndicatorCoupling;
  struct Trusted {};
  Graph(Trusted, Vertex n, std::vector<std::size_t> offsets, std::vector<Vertex> targets);

  Vertex n_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> targets_;
  std::optional<Vertex> regular_degree_;

  void detect_regularity();
};

// One bond-percolation draw G_p: every edge of the base graph kept
// independently with probability p (one Bernoulli per undirected edge, in
// canonical edge order). Keeps the full vertex set.
class PercolationSample {
 public:
  PercolationSample(const Graph& base, double p, RngStream rng);

  const Graph& base() const { return *base_; }
  const Graph& graph() const { return graph_; }
  std::span<const Edge> retained_edges() const { return retained_; }
  double p() const { return p_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  const Graph* base_;
  double p_;
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::vector<Edge> retained_;
  Graph graph_;
};

inline PercolationSample percolate(const Graph& g, double p, RngStream rng) {
  return PercolationSample(g, p, rng);
}

bool is_connected(const Graph& g);
inline bool is_connected(const PercolationSample& s) { return is_connected(s.graph()); }

// Size of the component containing start.
std::size_t component_size(const Graph& g, Vertex start);

}  // namespace rumorperc
