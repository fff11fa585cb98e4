#include "qcdet/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>

#include "qcdet/error.hpp"

namespace qcdet {

namespace {

void require_size(int n) {
  if (n < 2) {
    throw Error(ErrorKind::kInvalidSize, "graph needs at least 2 nodes, got " + std::to_string(n));
  }
}

std::int64_t max_edges(int n) { return static_cast<std::int64_t>(n) * (n - 1) / 2; }

}  // namespace

Graph::Graph(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  require_size(n_);
  for (auto& [i, j] : edges_) {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) {
      throw Error(ErrorKind::kInvalidInput, "edge endpoint out of range");
    }
    if (i == j) throw Error(ErrorKind::kInvalidInput, "self loop on node " + std::to_string(i));
    if (i > j) std::swap(i, j);
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
    throw Error(ErrorKind::kInvalidInput, "duplicate edge");
  }
  if (!is_connected(n_, edges_)) throw Error(ErrorKind::kInvalidInput, "graph is not connected");

  offsets_.assign(n_ + 1, 0);
  for (const auto& [i, j] : edges_) {
    ++offsets_[i + 1];
    ++offsets_[j + 1];
  }
  for (int i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
  adjacency_.resize(offsets_[n_]);
  std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [i, j] : edges_) {
    adjacency_[cursor[i]++] = j;
    adjacency_[cursor[j]++] = i;
  }
  for (int i = 0; i < n_; ++i) {
    std::sort(adjacency_.begin() + offsets_[i], adjacency_.begin() + offsets_[i + 1]);
  }
}

bool is_connected(int n, std::span<const Edge> edges) {
  if (n <= 0) return false;
  std::vector<std::vector<int>> adj(n);
  for (const auto& [i, j] : edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  std::vector<char> seen(n, 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == n;
}

Graph star(int n) {
  require_size(n);
  std::vector<Edge> edges;
  for (int k = 1; k < n; ++k) edges.emplace_back(0, k);
  return Graph(n, std::move(edges));
}

Graph path(int n) {
  require_size(n);
  std::vector<Edge> edges;
  for (int k = 0; k + 1 < n; ++k) edges.emplace_back(k, k + 1);
  return Graph(n, std::move(edges));
}

Graph complete(int n) {
  require_size(n);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(max_edges(n)));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  }
  return Graph(n, std::move(edges));
}

namespace {

// BFS from u looking for v in the graph without edge (u, v).
bool reachable_without_edge(const std::vector<std::vector<int>>& adj, int u, int v,
                            std::vector<int>& stamp, int epoch, std::vector<int>& queue) {
  queue.clear();
  queue.push_back(u);
  stamp[u] = epoch;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int w = queue[head];
    for (int z : adj[w]) {
      if (w == u && z == v) continue;
      if (z == v) return true;
      if (stamp[z] != epoch) {
        stamp[z] = epoch;
        queue.push_back(z);
      }
    }
  }
  return false;
}

void erase_neighbor(std::vector<int>& list, int value) {
  list.erase(std::find(list.begin(), list.end(), value));
}

}  // namespace

Graph random_connected(int n, std::int64_t m, std::uint64_t seed) {
  require_size(n);
  if (m < n - 1 || m > max_edges(n)) {
    throw Error(ErrorKind::kInvalidSize, "edge count " + std::to_string(m) + " outside [n-1, n(n-1)/2]");
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(max_edges(n)));
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      edges.emplace_back(i, j);
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
  }
  // edges[0, removable) are candidates; known bridges sit in [removable, end).
  std::size_t removable = edges.size();
  std::mt19937_64 rng(seed);
  std::vector<int> stamp(n, 0);
  std::vector<int> queue;
  int epoch = 0;
  while (static_cast<std::int64_t>(edges.size()) > m) {
    if (removable == 0) throw Error(ErrorKind::kInvalidSize, "no removable edge left");
    std::uniform_int_distribution<std::size_t> pick(0, removable - 1);
    const std::size_t idx = pick(rng);
    const auto [u, v] = edges[idx];
    std::swap(edges[idx], edges[removable - 1]);
    --removable;
    if (reachable_without_edge(adj, u, v, stamp, ++epoch, queue)) {
      std::swap(edges[removable], edges.back());
      edges.pop_back();
      erase_neighbor(adj[u], v);
      erase_neighbor(adj[v], u);
    }
  }
  return Graph(n, std::move(edges));
}

Graph read_edge_list(std::istream& in) {
  long long n = 0;
  long long m = 0;
  if (!(in >> n >> m)) throw Error(ErrorKind::kInvalidInput, "edge list: missing 'n m' header");
  if (n < 2 || n > (1LL << 30)) throw Error(ErrorKind::kInvalidSize, "edge list: bad node count");
  if (m < 0) throw Error(ErrorKind::kInvalidInput, "edge list: negative edge count");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long e = 0; e < m; ++e) {
    long long i = 0;
    long long j = 0;
    if (!(in >> i >> j)) throw Error(ErrorKind::kInvalidInput, "edge list: expected " + std::to_string(m) + " edges");
    if (i < 0 || j < 0 || i >= n || j >= n) throw Error(ErrorKind::kInvalidInput, "edge list: endpoint out of range");
    edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
  }
  return Graph(static_cast<int>(n), std::move(edges));
}

Graph read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kInvalidInput, "cannot open edge list " + path);
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const Graph& graph) {
  out << graph.node_count() << ' ' << graph.edge_count() << '\n';
  for (const auto& [i, j] : graph.edges()) out << i << ' ' << j << '\n';
}

}  // namespace qcdet
