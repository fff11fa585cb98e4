#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qcdet {

using Edge = std::pair<int, int>;

// Connected undirected simple graph on nodes 0..n-1. Immutable once built;
// edges are stored normalized (i < j) and sorted, neighbor lists ascending.
class Graph {
 public:
  // Validates: n >= 2, endpoints in range, no self loops or duplicates,
  // connected. Throws Error on violation.
  Graph(int n, std::vector<Edge> edges);

  int node_count() const noexcept { return n_; }
  std::int64_t edge_count() const noexcept { return static_cast<std::int64_t>(edges_.size()); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::span<const int> neighbors(int i) const noexcept {
    return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
  }
  int degree(int i) const noexcept { return offsets_[i + 1] - offsets_[i]; }

  friend bool operator==(const Graph& lhs, const Graph& rhs) {
    return lhs.n_ == rhs.n_ && lhs.edges_ == rhs.edges_;
  }

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<int> offsets_;    // CSR row offsets, size n + 1
  std::vector<int> adjacency_;  // CSR column indices
};

/// Checks connectivity of an arbitrary edge list over n nodes with one BFS.
bool is_connected(int n, std::span<const Edge> edges);

Graph star(int n);
Graph path(int n);
Graph complete(int n);

// Starts from the complete graph and removes uniformly drawn edges until m
// remain; an edge whose removal would disconnect the graph is marked as a
// bridge and never drawn again.
Graph random_connected(int n, std::int64_t m, std::uint64_t seed);

// Edge-list text format: header line "n m", then m lines "i j".
Graph read_edge_list(std::istream& in);
Graph read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const Graph& graph);

}  // namespace qcdet
