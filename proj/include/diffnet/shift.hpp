#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "diffnet/topology.hpp"

namespace diffnet {

/// Graph shift operator. Support is confined to the (self-inclusive)
/// neighborhoods; applying it propagates a graph signal one hop, and
/// repeated application realizes the space-time taps of the graph
/// regressor. The usual instance is the unweighted adjacency scaled so its
/// largest-magnitude eigenvalue is 1.
class ShiftOperator {
 public:
  struct Entry {
    int col;
    double val;
  };

  /// Scaled adjacency form: entry (k, j) = scale for every edge {j, k},
  /// zero diagonal.
  ShiftOperator(const NetworkTopology& topo, double scale) : v_(topo.node_count()), rows_(v_) {
    for (int k = 0; k < v_; ++k) {
      for (int j : topo.neighbors(k)) {
        if (j != k) rows_[k].push_back({j, scale});
      }
    }
  }

  static ShiftOperator identity(int node_count) {
    ShiftOperator s(node_count);
    for (int k = 0; k < node_count; ++k) s.rows_[k].push_back({k, 1.0});
    return s;
  }

  int node_count() const { return v_; }

  double entry(int k, int j) const {
    for (const Entry& e : rows_[k]) {
      if (e.col == j) return e.val;
    }
    return 0.0;
  }

  std::vector<std::vector<double>> dense() const {
    std::vector<std::vector<double>> a(v_, std::vector<double>(v_, 0.0));
    for (int k = 0; k < v_; ++k) {
      for (const Entry& e : rows_[k]) a[k][e.col] = e.val;
    }
    return a;
  }

  /// out = A * in, O(nonzeros).
  void apply(std::span<const double> in, std::span<double> out) const {
    for (int k = 0; k < v_; ++k) {
      double acc = 0.0;
      for (const Entry& e : rows_[k]) acc += e.val * in[e.col];
      out[k] = acc;
    }
  }

 private:
  explicit ShiftOperator(int node_count) : v_(node_count), rows_(node_count) {}

  int v_;
  std::vector<std::vector<Entry>> rows_;
};

/// Largest-magnitude adjacency eigenvalue by shifted power iteration. The
/// shift by the maximum degree keeps the dominant eigenvalue of the iterated
/// matrix simple and positive even on bipartite graphs.
inline double adjacency_spectral_radius(const NetworkTopology& topo, double tol = 1e-13,
                                        int max_iters = 200000) {
  const int v = topo.node_count();
  int max_degree = 0;
  for (int k = 0; k < v; ++k) max_degree = std::max(max_degree, topo.neighborhood_size(k) - 1);
  if (max_degree == 0)
    throw std::invalid_argument("adjacency_spectral_radius: graph has no edges");

  const double shift = static_cast<double>(max_degree);
  std::vector<double> x(v), y(v);
  for (int k = 0; k < v; ++k) x[k] = 1.0 + 1e-3 * static_cast<double>(k % 7);
  double x_norm = 0.0;
  for (double t : x) x_norm += t * t;
  x_norm = std::sqrt(x_norm);
  for (double& t : x) t /= x_norm;

  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    // y = (A + shift*I) x
    for (int k = 0; k < v; ++k) {
      double acc = shift * x[k];
      for (int j : topo.neighbors(k)) {
        if (j != k) acc += x[j];
      }
      y[k] = acc;
    }
    double rayleigh = 0.0, y_norm = 0.0;
    for (int k = 0; k < v; ++k) {
      rayleigh += x[k] * y[k];
      y_norm += y[k] * y[k];
    }
    y_norm = std::sqrt(y_norm);
    for (int k = 0; k < v; ++k) x[k] = y[k] / y_norm;
    if (it > 0 && std::abs(rayleigh - lambda) <= tol * std::max(1.0, std::abs(rayleigh))) {
      lambda = rayleigh;
      break;
    }
    lambda = rayleigh;
  }
  return lambda - shift;
}

/// Adjacency normalized by its largest eigenvalue. Fails on an edgeless
/// graph.
inline ShiftOperator normalized_adjacency_shift(const NetworkTopology& topo) {
  double radius = adjacency_spectral_radius(topo);
  if (!(radius > 0.0))
    throw std::invalid_argument("normalized_adjacency_shift: zero spectral radius");
  return ShiftOperator(topo, 1.0 / radius);
}

}  // namespace diffnet
