#pragma once

#include <cmath>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffnet/topology.hpp"

namespace diffnet {

/// Column-stochastic combination weights: entry (j, k) is the weight node k
/// applies to the local estimate received from neighbor j. Entries outside
/// the neighborhood are zero.
class CombinationMatrix {
 public:
  explicit CombinationMatrix(int node_count)
      : v_(node_count), a_(static_cast<std::size_t>(node_count) * node_count, 0.0) {}

  int node_count() const { return v_; }
  double operator()(int j, int k) const { return a_[static_cast<std::size_t>(j) * v_ + k]; }
  double& operator()(int j, int k) { return a_[static_cast<std::size_t>(j) * v_ + k]; }

 private:
  int v_;
  std::vector<double> a_;
};

struct WeightCheck {
  bool ok = true;
  int j = -1;
  int k = -1;
  std::string message;
};

/// Checks nonnegativity, unit column sums (tolerance 1e-12 by default), and
/// support confined to the neighborhoods. Reports the first violation.
inline WeightCheck validate_weights(const CombinationMatrix& c, const NetworkTopology& topo,
                                    double tol = 1e-12) {
  WeightCheck r;
  const int v = topo.node_count();
  if (c.node_count() != v) {
    r.ok = false;
    r.message = "dimension mismatch";
    return r;
  }
  for (int k = 0; k < v; ++k) {
    double col_sum = 0.0;
    for (int j = 0; j < v; ++j) {
      double w = c(j, k);
      if (w < 0.0) {
        r = {false, j, k, ""};
        std::ostringstream os;
        os << "negative weight c(" << j << "," << k << ") = " << w;
        r.message = os.str();
        return r;
      }
      if (w != 0.0 && !topo.adjacent(j, k)) {
        r = {false, j, k, ""};
        std::ostringstream os;
        os << "nonzero weight outside neighborhood at c(" << j << "," << k << ")";
        r.message = os.str();
        return r;
      }
      col_sum += w;
    }
    if (std::abs(col_sum - 1.0) > tol) {
      r = {false, -1, k, ""};
      std::ostringstream os;
      os << "column " << k << " sums to " << col_sum;
      r.message = os.str();
      return r;
    }
  }
  return r;
}

inline CombinationMatrix uniform_weights(const NetworkTopology& topo) {
  const int v = topo.node_count();
  CombinationMatrix c(v);
  for (int k = 0; k < v; ++k) {
    double w = 1.0 / static_cast<double>(topo.neighborhood_size(k));
    for (int j : topo.neighbors(k)) c(j, k) = w;
  }
  return c;
}

inline CombinationMatrix metropolis_weights(const NetworkTopology& topo) {
  const int v = topo.node_count();
  CombinationMatrix c(v);
  for (int k = 0; k < v; ++k) {
    double off_sum = 0.0;
    for (int j : topo.neighbors(k)) {
      if (j == k) continue;
      double w = 1.0 / static_cast<double>(
                           std::max(topo.neighborhood_size(j), topo.neighborhood_size(k)));
      c(j, k) = w;
      off_sum += w;
    }
    c(k, k) = 1.0 - off_sum;
  }
  return c;
}

/// Adaptive combination weights. Node k tracks a variance proxy
/// sigma_hat_sq(j, k) for each neighbor j via a leaky average of
/// ||psi_j(n+1) - w_k(n)||^2 and weights neighbors by its regularized
/// inverse. For the self term the recursion uses psi_bar_k, the local
/// estimate most recently produced while node k was sampled; otherwise a
/// long-unsampled node would drive its own proxy to zero and monopolize the
/// weights.
class AcwState {
 public:
  AcwState(const NetworkTopology& topo, int filter_order, double nu, double delta_c)
      : topo_(&topo),
        order_(filter_order),
        nu_(nu),
        delta_c_(delta_c),
        sigma_hat_sq_(static_cast<std::size_t>(topo.node_count()) * topo.node_count(), 0.0),
        psi_bar_(static_cast<std::size_t>(topo.node_count()) * filter_order, 0.0) {
    if (nu <= 0.0) throw std::invalid_argument("acw: nu must be > 0");
    if (delta_c <= 0.0) throw std::invalid_argument("acw: delta_c must be > 0");
  }

  double sigma_hat_sq(int j, int k) const {
    return sigma_hat_sq_[static_cast<std::size_t>(j) * topo_->node_count() + k];
  }
  double& sigma_hat_sq(int j, int k) {
    return sigma_hat_sq_[static_cast<std::size_t>(j) * topo_->node_count() + k];
  }

  std::span<const double> psi_bar(int k) const {
    return {psi_bar_.data() + static_cast<std::size_t>(k) * order_,
            static_cast<std::size_t>(order_)};
  }

  double nu() const { return nu_; }
  double delta_c() const { return delta_c_; }

  /// One recursion step, refreshing `c` in place. psi_all and w_all hold one
  /// filter_order-length row per node; sbar_all flags which nodes were
  /// sampled this iteration.
  void update(std::span<const double> psi_all, std::span<const double> w_all,
              std::span<const int> sbar_all, CombinationMatrix& c) {
    const int v = topo_->node_count();
    const int m = order_;
    for (int k = 0; k < v; ++k) {
      const double* psi_k = psi_all.data() + static_cast<std::size_t>(k) * m;
      double* bar_k = psi_bar_.data() + static_cast<std::size_t>(k) * m;
      if (sbar_all[k]) {
        for (int i = 0; i < m; ++i) bar_k[i] = psi_k[i];
      }
    }
    for (int k = 0; k < v; ++k) {
      const double* w_k = w_all.data() + static_cast<std::size_t>(k) * m;
      double inv_sum = 0.0;
      for (int j : topo_->neighbors(k)) {
        const double* est = (j == k) ? psi_bar_.data() + static_cast<std::size_t>(j) * m
                                     : psi_all.data() + static_cast<std::size_t>(j) * m;
        double dist_sq = 0.0;
        for (int i = 0; i < m; ++i) {
          double d = est[i] - w_k[i];
          dist_sq += d * d;
        }
        double& s = sigma_hat_sq(j, k);
        s = (1.0 - nu_) * s + nu_ * dist_sq;
        inv_sum += 1.0 / (delta_c_ + s);
      }
      for (int j : topo_->neighbors(k)) {
        c(j, k) = (1.0 / (delta_c_ + sigma_hat_sq(j, k))) / inv_sum;
      }
    }
  }

 private:
  const NetworkTopology* topo_;
  int order_;
  double nu_;
  double delta_c_;
  std::vector<double> sigma_hat_sq_;
  std::vector<double> psi_bar_;
};

}  // namespace diffnet
