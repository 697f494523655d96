#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "rumorperc/graph.hpp"

using namespace rumorperc;

TEST_CASE("complete graph sizes") {
  const Graph g = Graph::complete(512);
  CHECK(g.vertex_count() == 512);
  CHECK(g.edge_count() == 130816);
  CHECK(g.regular_degree() == Vertex{511});
  CHECK(g.has_edge(0, 511));
  CHECK_FALSE(g.has_edge(3, 3));

  const Graph one = Graph::complete(1);
  CHECK(one.vertex_count() == 1);
  CHECK(one.edge_count() == 0);
}

TEST_CASE("hypercube sizes and structure") {
  const Graph g = Graph::hypercube(10);
  CHECK(g.vertex_count() == 1024);
  CHECK(g.edge_count() == 5120);
  CHECK(g.regular_degree() == Vertex{10});
  // Neighbors differ in exactly one bit.
  for (Vertex v : {Vertex{0}, Vertex{5}, Vertex{1023}})
    for (const Vertex w : g.neighbors(v)) CHECK(std::popcount(v ^ w) == 1);
}

TEST_CASE("random regular graphs are regular and reproducible") {
  const Graph a = Graph::random_regular(100, 10, 77);
  const Graph b = Graph::random_regular(100, 10, 77);
  CHECK(a == b);
  CHECK(a.vertex_count() == 100);
  CHECK(a.edge_count() == 500);
  for (Vertex v = 0; v < 100; ++v) CHECK(a.degree(v) == 10);

  bool any_differ = false;
  for (std::uint64_t seed = 1; seed <= 5 && !any_differ; ++seed)
    any_differ = !(Graph::random_regular(100, 10, seed) == a);
  CHECK(any_differ);
}

TEST_CASE("random regular at full degree is the complete graph") {
  CHECK(Graph::random_regular(4, 3, 123) == Graph::complete(4));
}

TEST_CASE("random regular rejects odd degree sums and oversized degrees") {
  CHECK_THROWS_AS(Graph::random_regular(5, 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(Graph::random_regular(4, 4, 1), std::invalid_argument);
}

TEST_CASE("from_edges validates") {
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 1}, {0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph::from_edges(3, {{1, 0}, {0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph::from_edges(2, {{0, 2}}), std::invalid_argument);
  const Graph g = Graph::from_edges(4, {{2, 3}, {0, 1}});
  CHECK(g.edge_count() == 2);
  CHECK(g.has_edge(1, 0));
  CHECK(g.regular_degree() == Vertex{1});
}

TEST_CASE("edges come out in canonical ascending order") {
  const Graph g = Graph::hypercube(4);
  const auto edges = g.edges();
  CHECK(edges.size() == g.edge_count());
  CHECK(std::is_sorted(edges.begin(), edges.end()));
  for (const auto& [u, v] : edges) CHECK(u < v);
}

TEST_CASE("edge list round trip") {
  const Graph g = Graph::random_regular(30, 4, 9);
  std::stringstream buffer;
  g.dump_edge_list(buffer);
  CHECK(Graph::load_edge_list(buffer) == g);
}

TEST_CASE("edge list loader rejects malformed input") {
  const auto load = [](const char* text) {
    std::istringstream in(text);
    return Graph::load_edge_list(in);
  };
  CHECK_THROWS_AS(load(""), std::runtime_error);
  CHECK_THROWS_AS(load("2 1\n"), std::runtime_error);             // missing edge
  CHECK_THROWS_AS(load("2 1\n0 5\n"), std::runtime_error);        // vertex out of range
  CHECK_THROWS_AS(load("2 2\n0 1\n0 1\n"), std::invalid_argument);  // duplicate
}

TEST_CASE("percolation keeps everything at p=1 and nothing at p->0 draws") {
  const Graph g = Graph::complete(32);
  const PercolationSample full(g, 1.0, RngStream(1, 2));
  CHECK(full.graph() == g);
  CHECK(full.retained_edges().size() == g.edge_count());

  // p must lie in [0, 1]; 0 keeps nothing, out-of-range is rejected.
  CHECK_THROWS_AS(PercolationSample(g, -0.1, RngStream(1, 2)), std::invalid_argument);
  CHECK_THROWS_AS(PercolationSample(g, 1.5, RngStream(1, 2)), std::invalid_argument);
  CHECK(PercolationSample(g, 0.0, RngStream(1, 2)).graph().edge_count() == 0);
  const PercolationSample sparse(g, 1e-12, RngStream(1, 2));
  CHECK(sparse.graph().edge_count() == 0);
  CHECK(sparse.graph().vertex_count() == 32);
}

TEST_CASE("percolation replays under the same stream and tracks its ids") {
  const Graph g = Graph::complete(24);
  const PercolationSample a(g, 0.4, RngStream(11, 5));
  const PercolationSample b(g, 0.4, RngStream(11, 5));
  CHECK(a.graph() == b.graph());
  CHECK(a.seed() == 11);
  CHECK(a.stream_id() == 5);
  CHECK(a.p() == 0.4);
  // Retained edges are exactly the edges of the sampled graph.
  const auto sampled = a.graph().edges();
  CHECK(std::vector<Edge>(a.retained_edges().begin(), a.retained_edges().end()) == sampled);
}

TEST_CASE("percolation retention rate is near p") {
  const Graph g = Graph::complete(64);  // 2016 edges
  const double p = 0.3;
  std::size_t kept = 0;
  const int reps = 50;
  for (int i = 0; i < reps; ++i)
    kept += PercolationSample(g, p, RngStream(3, i)).retained_edges().size();
  const double total = static_cast<double>(g.edge_count()) * reps;
  const double rate = static_cast<double>(kept) / total;
  const double se = std::sqrt(p * (1 - p) / total);
  CHECK(std::abs(rate - p) < 5 * se);
}

TEST_CASE("connectivity and component sizes") {
  const Graph path = Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
  CHECK(is_connected(path));
  CHECK(component_size(path, 0) == 4);

  const Graph split = Graph::from_edges(4, {{0, 1}, {2, 3}});
  CHECK_FALSE(is_connected(split));
  CHECK(component_size(split, 0) == 2);
  CHECK(component_size(split, 3) == 2);

  const Graph lonely = Graph::from_edges(1, {});
  CHECK(is_connected(lonely));
  CHECK(component_size(lonely, 0) == 1);
}
