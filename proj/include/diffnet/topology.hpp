#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "diffnet/rng.hpp"

namespace diffnet {

/// Undirected connected network. Neighborhoods are self-inclusive: node k
/// always appears in its own neighbor list, matching the convention used by
/// the diffusion recursions throughout this library.
class NetworkTopology {
 public:
  NetworkTopology(int node_count, std::vector<std::pair<int, int>> edges)
      : v_(node_count), edges_(std::move(edges)) {
    if (v_ < 1) throw std::invalid_argument("topology: node count must be >= 1");
    neighbors_.assign(v_, {});
    for (auto& [a, b] : edges_) {
      if (a > b) std::swap(a, b);
      if (a < 0 || b >= v_) throw std::invalid_argument("topology: edge index out of range");
      if (a == b) throw std::invalid_argument("topology: self-loops are implicit, not edges");
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    for (int k = 0; k < v_; ++k) neighbors_[k].push_back(k);
    for (auto [a, b] : edges_) {
      neighbors_[a].push_back(b);
      neighbors_[b].push_back(a);
    }
    for (auto& nk : neighbors_) std::sort(nk.begin(), nk.end());
    if (!connected()) throw std::invalid_argument("topology: graph is not connected");
  }

  int node_count() const { return v_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  /// N_k, sorted ascending, including k itself.
  const std::vector<int>& neighbors(int k) const { return neighbors_[k]; }

  int neighborhood_size(int k) const { return static_cast<int>(neighbors_[k].size()); }

  /// Sum_k |N_k| with the self-inclusive convention (= V + 2|E|).
  int neighborhood_mass() const {
    int total = 0;
    for (int k = 0; k < v_; ++k) total += neighborhood_size(k);
    return total;
  }

  double mean_degree() const {
    return static_cast<double>(2 * edge_count()) / static_cast<double>(v_);
  }

  bool adjacent(int j, int k) const {
    const auto& nk = neighbors_[k];
    return std::binary_search(nk.begin(), nk.end(), j);
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["V"] = v_;
    auto& e = j["edges"] = nlohmann::json::array();
    for (auto [a, b] : edges_) e.push_back({a, b});
    return j;
  }

  static NetworkTopology from_json(const nlohmann::json& j) {
    if (!j.contains("V") || !j.contains("edges"))
      throw std::invalid_argument("topology json: expected fields V and edges");
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2)
        throw std::invalid_argument("topology json: each edge must be a pair");
      edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    return NetworkTopology(j.at("V").get<int>(), std::move(edges));
  }

  static NetworkTopology load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("topology: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("topology: cannot write " + path);
    out << to_json().dump() << '\n';
  }

 private:
  bool connected() const {
    std::vector<char> seen(v_, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
      int k = stack.back();
      stack.pop_back();
      for (int j : neighbors_[k]) {
        if (!seen[j]) {
          seen[j] = 1;
          ++reached;
          stack.push_back(j);
        }
      }
    }
    return reached == v_;
  }

  int v_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> neighbors_;
};

/// Seeded random geometric graph on the unit square. Nodes are placed
/// uniformly; the connection radius is chosen as the pairwise distance that
/// realizes round(V*degree/2) edges, then grown edge-by-edge until the graph
/// is connected. Deterministic for a fixed seed.
inline NetworkTopology build_random_geometric_network(int node_count,
                                                      double target_mean_degree,
                                                      std::uint64_t seed) {
  if (node_count < 2)
    throw std::invalid_argument("build_random_geometric_network: V must be >= 2");
  if (target_mean_degree < 1.0 || target_mean_degree > node_count - 1)
    throw std::invalid_argument(
        "build_random_geometric_network: target mean degree out of [1, V-1]");

  Rng rng(seed, 0, 0, StreamPurpose::kTopology);
  std::vector<double> xs(node_count), ys(node_count);
  for (int k = 0; k < node_count; ++k) {
    xs[k] = rng.uniform01();
    ys[k] = rng.uniform01();
  }

  struct Pair {
    double dist_sq;
    int a, b;
  };
  std::vector<Pair> pairs;
  pairs.reserve(node_count * (node_count - 1) / 2);
  for (int a = 0; a < node_count; ++a) {
    for (int b = a + 1; b < node_count; ++b) {
      double dx = xs[a] - xs[b], dy = ys[a] - ys[b];
      pairs.push_back({dx * dx + dy * dy, a, b});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& p, const Pair& q) {
    if (p.dist_sq != q.dist_sq) return p.dist_sq < q.dist_sq;
    return std::make_pair(p.a, p.b) < std::make_pair(q.a, q.b);
  });

  long target_edges = std::lround(node_count * target_mean_degree / 2.0);
  target_edges = std::max(1L, std::min<long>(target_edges, static_cast<long>(pairs.size())));

  // union-find over nodes, so the growth phase can stop exactly at connectivity
  std::vector<int> parent(node_count);
  for (int k = 0; k < node_count; ++k) parent[k] = k;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int components = node_count;

  std::vector<std::pair<int, int>> edges;
  std::size_t i = 0;
  for (; i < static_cast<std::size_t>(target_edges); ++i) {
    edges.emplace_back(pairs[i].a, pairs[i].b);
    int ra = find(pairs[i].a), rb = find(pairs[i].b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  for (; components > 1 && i < pairs.size(); ++i) {
    edges.emplace_back(pairs[i].a, pairs[i].b);
    int ra = find(pairs[i].a), rb = find(pairs[i].b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return NetworkTopology(node_count, std::move(edges));
}

}  // namespace diffnet
