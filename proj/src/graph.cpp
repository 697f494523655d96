#include "rumorperc/graph.hpp"

#include <algorithm>
#include <cassert>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace rumorperc {

namespace {

std::uint64_t edge_key(Vertex u, Vertex v) {
  return (static_cast<std::uint64_t>(std::min(u, v)) << 32) | std::max(u, v);
}

}  // namespace

Graph::Graph(Trusted, Vertex n, std::vector<std::size_t> offsets, std::vector<Vertex> targets)
    : n_(n), offsets_(std::move(offsets)), targets_(std::move(targets)) {
  assert(offsets_.size() == static_cast<std::size_t>(n_) + 1);
  assert(offsets_.back() == targets_.size());
  detect_regularity();
}

void Graph::detect_regularity() {
  if (n_ == 0) return;
  const Vertex d0 = degree(0);
  for (Vertex v = 1; v < n_; ++v) {
    if (degree(v) != d0) return;
  }
  regular_degree_ = d0;
}

Graph Graph::from_edges(Vertex n, const std::vector<Edge>& edges) {
  if (n < 1) throw std::invalid_argument("graph: vertex count must be >= 1");
  std::vector<std::size_t> counts(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) throw std::invalid_argument("graph: vertex id out of range");
    if (u == v) throw std::invalid_argument("graph: self-loop rejected");
    counts[u + 1] += 1;
    counts[v + 1] += 1;
  }
  for (Vertex v = 0; v < n; ++v) counts[v + 1] += counts[v];
  std::vector<Vertex> targets(counts.back());
  std::vector<std::size_t> fill(counts.begin(), counts.end() - 1);
  for (const auto& [u, v] : edges) {
    targets[fill[u]++] = v;
    targets[fill[v]++] = u;
  }
  Graph g(Trusted{}, n, std::move(counts), std::move(targets));
  for (Vertex v = 0; v < n; ++v) {
    auto* begin = g.targets_.data() + g.offsets_[v];
    auto* end = g.targets_.data() + g.offsets_[v + 1];
    std::sort(begin, end);
    if (std::adjacent_find(begin, end) != end)
      throw std::invalid_argument("graph: duplicate edge rejected");
  }
  return g;
}

Graph Graph::complete(Vertex n) {
  if (n < 1) throw std::invalid_argument("complete: n must be >= 1");
  std::vector<std::size_t> offsets(static_cast<std::size_t>(n) + 1);
  std::vector<Vertex> targets;
  targets.resize(static_cast<std::size_t>(n) * (n - 1));
  std::size_t pos = 0;
  for (Vertex v = 0; v < n; ++v) {
    offsets[v] = pos;
    for (Vertex w = 0; w < n; ++w) {
      if (w != v) targets[pos++] = w;
    }
  }
  offsets[n] = pos;
  return Graph(Trusted{}, n, std::move(offsets), std::move(targets));
}

Graph Graph::hypercube(unsigned dim) {
  if (dim < 1 || dim > 31) throw std::invalid_argument("hypercube: dim must be in [1, 31]");
  const Vertex n = Vertex{1} << dim;
  std::vector<std::size_t> offsets(static_cast<std::size_t>(n) + 1);
  std::vector<Vertex> targets(static_cast<std::size_t>(n) * dim);
  std::size_t pos = 0;
  for (Vertex v = 0; v < n; ++v) {
    offsets[v] = pos;
    for (unsigned b = 0; b < dim; ++b) targets[pos++] = v ^ (Vertex{1} << b);
    std::sort(targets.begin() + offsets[v], targets.begin() + pos);
  }
  offsets[n] = pos;
  return Graph(Trusted{}, n, std::move(offsets), std::move(targets));
}

Graph Graph::random_regular(Vertex n, Vertex d, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_regular: n must be >= 1");
  if (d >= n) throw std::invalid_argument("random_regular: need d < n");
  if ((static_cast<std::uint64_t>(n) * d) % 2 != 0)
    throw std::invalid_argument("random_regular: n*d must be even");
  if (d == 0) return from_edges(n, {});

  RngStream rng = RngStream(seed, 0).substream(streams::kGenerator);
  constexpr int kMaxRestarts = 10000;
  for (int attempt = 0; attempt < kMaxRestarts; ++attempt) {
    // One cell per half-edge; pair cells uniformly, redrawing pairs that
    // would create a self-loop or duplicate edge.
    std::vector<Vertex> cells;
    cells.reserve(static_cast<std::size_t>(n) * d);
    for (Vertex v = 0; v < n; ++v) {
      for (Vertex k = 0; k < d; ++k) cells.push_back(v);
    }
    std::unordered_set<std::uint64_t> used;
    used.reserve(cells.size());
    std::vector<Edge> edges;
    edges.reserve(cells.size() / 2);
    int rejects = 0;
    bool stuck = false;
    while (!cells.empty()) {
      const std::size_t i = rng.next_below(cells.size());
      std::size_t j = rng.next_below(cells.size() - 1);
      if (j >= i) ++j;
      const Vertex u = cells[i];
      const Vertex v = cells[j];
      if (u != v && used.find(edge_key(u, v)) == used.end()) {
        used.insert(edge_key(u, v));
        edges.emplace_back(std::min(u, v), std::max(u, v));
        const std::size_t hi = std::max(i, j);
        const std::size_t lo = std::min(i, j);
        cells[hi] = cells.back();
        cells.pop_back();
        cells[lo] = cells.back();
        cells.pop_back();
        rejects = 0;
        continue;
      }
      if (++rejects > 1000) {
        // Exhaustive scan: does any valid pair remain?
        bool any = false;
        for (std::size_t a = 0; a < cells.size() && !any; ++a) {
          for (std::size_t b = a + 1; b < cells.size() && !any; ++b) {
            if (cells[a] != cells[b] && used.find(edge_key(cells[a], cells[b])) == used.end())
              any = true;
          }
        }
        if (!any) {
          stuck = true;
          break;
        }
        rejects = 0;
      }
    }
    if (!stuck) return from_edges(n, edges);
  }
  throw std::runtime_error("random_regular: restart cap (10^4) exceeded");
}

bool Graph::has_edge(Vertex u, Vertex v) const {
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (Vertex u = 0; u < n_; ++u) {
    for (const Vertex v : neighbors(u)) {
      if (v > u) out.emplace_back(u, v);
    }
  }
  return out;
}

void Graph::dump_edge_list(std::ostream& out) const {
  out << n_ << ' ' << edge_count() << '\n';
  for (Vertex u = 0; u < n_; ++u) {
    for (const Vertex v : neighbors(u)) {
      if (v > u) out << u << ' ' << v << '\n';
    }
  }
}

Graph Graph::load_edge_list(std::istream& in) {
  std::uint64_t n = 0, m = 0;
  if (!(in >> n >> m)) throw std::runtime_error("edge list: cannot read header 'n m'");
  if (n < 1 || n > 0xffffffffull) throw std::runtime_error("edge list: vertex count out of range");
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    std::uint64_t u = 0, v = 0;
    if (!(in >> u >> v)) {
      std::ostringstream msg;
      msg << "edge list: expected " << m << " edges, failed reading edge " << i;
      throw std::runtime_error(msg.str());
    }
    if (u >= n || v >= n) throw std::runtime_error("edge list: vertex id out of range");
    edges.emplace_back(static_cast<Vertex>(std::min(u, v)), static_cast<Vertex>(std::max(u, v)));
  }
  return from_edges(static_cast<Vertex>(n), edges);
}

PercolationSample::PercolationSample(const Graph& base, double p, RngStream rng)
    : base_(&base),
      p_(p),
      seed_(rng.seed()),
      stream_id_(rng.stream_id()),
      graph_(Graph::Trusted{}, 1, {0, 0}, {}) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("percolate: p must be in [0, 1]");
  const Vertex n = base.vertex_count();
  std::vector<std::size_t> counts(static_cast<std::size_t>(n) + 1, 0);
  retained_.reserve(static_cast<std::size_t>(static_cast<double>(base.edge_count()) * p * 1.05) + 16);
  for (Vertex u = 0; u < n; ++u) {
    for (const Vertex v : base.neighbors(u)) {
      if (v <= u) continue;
      if (rng.bernoulli(p)) {
        retained_.emplace_back(u, v);
        counts[u + 1] += 1;
        counts[v + 1] += 1;
      }
    }
  }
  for (Vertex v = 0; v < n; ++v) counts[v + 1] += counts[v];
  std::vector<Vertex> targets(counts.back());
  std::vector<std::size_t> fill(counts.begin(), counts.end() - 1);
  // Retained edges come out in canonical order, so each adjacency row is
  // filled already sorted: smaller ids first (ascending), then larger.
  for (const auto& [u, v] : retained_) {
    targets[fill[u]++] = v;
    targets[fill[v]++] = u;
  }
  graph_ = Graph(Graph::Trusted{}, n, std::move(counts), std::move(targets));
}

std::size_t component_size(const Graph& g, Vertex start) {
  const Vertex n = g.vertex_count();
  if (start >= n) throw std::invalid_argument("component_size: start out of range");
  std::vector<char> seen(n, 0);
  std::vector<Vertex> queue;
  queue.reserve(64);
  seen[start] = 1;
  queue.push_back(start);
  std::size_t head = 0;
  while (head < queue.size()) {
    const Vertex u = queue[head++];
    for (const Vertex v : g.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        queue.push_back(v);
      }
    }
  }
  return queue.size();
}

bool is_connected(const Graph& g) { return component_size(g, 0) == g.vertex_count(); }

}  // namespace rumorperc
