#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "diffnet/metrics.hpp"
#include "diffnet/rng.hpp"
#include "diffnet/sampling.hpp"
#include "diffnet/theory.hpp"
#include "diffnet/weights.hpp"

namespace diffnet {

enum class AlgorithmKind { kDnlmsFull, kDnlmsRandom, kAsDnlms, kAscDnlms };
enum class CombinerRule { kUniform, kMetropolis, kAcw };

inline bool uses_sampling_controller(AlgorithmKind a) {
  return a == AlgorithmKind::kAsDnlms || a == AlgorithmKind::kAscDnlms;
}

/// Local NLMS adaptation. When sampled, returns the a-priori error and
/// writes w + mu x e into psi_next; when not, copies w and computes nothing
/// else.
inline std::optional<double> adapt_step(std::span<const double> w, std::span<const double> x,
                                        double d, int sbar, double mu_tilde, double delta,
                                        std::span<double> psi_next) {
  const std::size_t m = w.size();
  if (!sbar) {
    for (std::size_t i = 0; i < m; ++i) psi_next[i] = w[i];
    return std::nullopt;
  }
  double dot = 0.0, x_norm_sq = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    dot += x[i] * w[i];
    x_norm_sq += x[i] * x[i];
  }
  double e = d - dot;
  double mu = mu_tilde / (delta + x_norm_sq);
  for (std::size_t i = 0; i < m; ++i) psi_next[i] = w[i] + mu * x[i] * e;
  return e;
}

/// Censoring variant: an unsampled node holds its previous local estimate
/// instead of resetting it to the combined one, and transmits nothing.
inline std::optional<double> censor_adapt_step(std::span<const double> w,
                                               std::span<const double> psi_prev,
                                               std::span<const double> x, double d, int sbar,
                                               double mu_tilde, double delta,
                                               std::span<double> psi_next) {
  if (!sbar) {
    for (std::size_t i = 0; i < w.size(); ++i) psi_next[i] = psi_prev[i];
    return std::nullopt;
  }
  return adapt_step(w, x, d, 1, mu_tilde, delta, psi_next);
}

/// w_k = sum_{j in N_k} c(j,k) psi_j for every node.
inline void combine_step(const NetworkTopology& topo, const CombinationMatrix& c,
                         std::span<const double> psi_all, std::span<double> w_all, int order) {
  const int v = topo.node_count();
  if (psi_all.size() != static_cast<std::size_t>(v) * order ||
      w_all.size() != static_cast<std::size_t>(v) * order)
    throw std::invalid_argument("combine_step: dimension mismatch");
  for (int k = 0; k < v; ++k) {
    double* wk = w_all.data() + static_cast<std::size_t>(k) * order;
    for (int i = 0; i < order; ++i) wk[i] = 0.0;
    for (int j : topo.neighbors(k)) {
      const double cjk = c(j, k);
      const double* pj = psi_all.data() + static_cast<std::size_t>(j) * order;
      for (int i = 0; i < order; ++i) wk[i] += cjk * pj[i];
    }
  }
}

/// Exactly `sampled` distinct nodes drawn uniformly without replacement,
/// fresh each call.
inline void random_sampling_schedule(int node_count, int sampled, Rng& stream,
                                     std::span<int> sbar_out) {
  if (sampled < 0 || sampled > node_count)
    throw std::invalid_argument("random_sampling_schedule: sampled count out of [0, V]");
  std::vector<int> idx(node_count);
  for (int k = 0; k < node_count; ++k) idx[k] = k;
  for (int k = 0; k < node_count; ++k) sbar_out[k] = 0;
  for (int i = 0; i < sampled; ++i) {
    int j = i + stream.uniform_int(node_count - i);
    std::swap(idx[i], idx[j]);
    sbar_out[idx[i]] = 1;
  }
}

struct EngineConfig {
  AlgorithmKind algorithm = AlgorithmKind::kDnlmsFull;
  CombinerRule combiner = CombinerRule::kUniform;
  int sampled_nodes = 0;  // random-sampling mode
  double beta = 0.0;
  double mu_s = 0.0;
  double alpha_plus = 4.0;
  double delta = 1e-5;
  double acw_nu = 0.2;
  double acw_delta_c = 1e-5;
  bool use_phi_lut = false;
  std::uint64_t schedule_seed = 0;  // random-sampling mode
};

struct IterationStats {
  int v_s = 0;
  int v_t = 0;
  OpCount ops;
};

/// One realization's full network state, advanced one iteration at a time:
/// sampling decision, adaptation, transmission bookkeeping, weight update,
/// sampling-controller update, combination.
class DiffusionEngine {
 public:
  DiffusionEngine(const NetworkTopology& topo, int order, std::vector<double> mu_tilde,
                  const EngineConfig& cfg)
      : topo_(&topo),
        v_(topo.node_count()),
        m_(order),
        cfg_(cfg),
        mu_tilde_(std::move(mu_tilde)),
        weights_(topo.node_count()),
        w_(static_cast<std::size_t>(v_) * order, 0.0),
        w_next_(static_cast<std::size_t>(v_) * order, 0.0),
        psi_(static_cast<std::size_t>(v_) * order, 0.0),
        alpha_(v_, cfg.alpha_plus),
        sbar_(v_, 1),
        eps_sq_(v_, 0.0),
        shadow_e_(v_, 0.0),
        schedule_rng_(cfg.schedule_seed) {
    if (static_cast<int>(mu_tilde_.size()) != v_)
      throw std::invalid_argument("engine: mu_tilde length != V");
    for (double mt : mu_tilde_) {
      if (!(mt > 0.0 && mt < 2.0))
        throw std::invalid_argument("engine: mu_tilde must lie in (0, 2)");
    }
    if (!(cfg.delta > 0.0)) throw std::invalid_argument("engine: delta must be > 0");
    if (uses_sampling_controller(cfg.algorithm)) {
      if (!(cfg.beta >= 0.0)) throw std::invalid_argument("engine: beta must be >= 0");
      if (!(cfg.mu_s > 0.0)) throw std::invalid_argument("engine: mu_s must be > 0");
    }
    if (cfg.algorithm == AlgorithmKind::kDnlmsRandom &&
        (cfg.sampled_nodes < 0 || cfg.sampled_nodes > v_))
      throw std::invalid_argument("engine: sampled_nodes out of [0, V]");

    switch (cfg.combiner) {
      case CombinerRule::kUniform:
        weights_ = uniform_weights(topo);
        break;
      case CombinerRule::kMetropolis:
        weights_ = metropolis_weights(topo);
        break;
      case CombinerRule::kAcw:
        acw_.emplace(topo, order, cfg.acw_nu, cfg.acw_delta_c);
        weights_ = uniform_weights(topo);  // placeholder until the first update
        break;
    }
    if (cfg.use_phi_lut) phi_lut_.emplace(cfg.alpha_plus);
  }

  int node_count() const { return v_; }
  int order() const { return m_; }
  AlgorithmKind algorithm() const { return cfg_.algorithm; }

  std::span<const double> w_all() const { return w_; }
  std::span<const double> psi_all() const { return psi_; }
  std::span<const double> w(int k) const {
    return {w_.data() + static_cast<std::size_t>(k) * m_, static_cast<std::size_t>(m_)};
  }
  std::span<const double> psi(int k) const {
    return {psi_.data() + static_cast<std::size_t>(k) * m_, static_cast<std::size_t>(m_)};
  }
  double alpha(int k) const { return alpha_[k]; }
  int sbar(int k) const { return sbar_[k]; }
  double eps_sq(int k) const { return eps_sq_[k]; }
  std::span<const double> shadow_errors() const { return shadow_e_; }
  const CombinationMatrix& weights() const { return weights_; }
  const NetworkTopology& topology() const { return *topo_; }

  /// Advance one iteration. x_all holds the V regressor rows for this
  /// iteration, d_all the V desired samples.
  IterationStats iterate(std::span<const double> x_all, std::span<const double> d_all) {
    decide_sampling();

    // adaptation; shadow errors for unsampled nodes are a metrics-only
    // evaluation and are not charged to the op model
    for (int k = 0; k < v_; ++k) {
      auto xk = x_all.subspan(static_cast<std::size_t>(k) * m_, m_);
      auto wk = std::span<const double>(w_.data() + static_cast<std::size_t>(k) * m_, m_);
      auto psik = std::span<double>(psi_.data() + static_cast<std::size_t>(k) * m_, m_);
      std::optional<double> e;
      if (cfg_.algorithm == AlgorithmKind::kAscDnlms) {
        e = censor_adapt_step(wk, psik, xk, d_all[k], sbar_[k], mu_tilde_[k], cfg_.delta, psik);
      } else {
        e = adapt_step(wk, xk, d_all[k], sbar_[k], mu_tilde_[k], cfg_.delta, psik);
      }
      if (e) {
        eps_sq_[k] = *e * *e;
        shadow_e_[k] = *e;
      } else {
        double dot = 0.0;
        for (int i = 0; i < m_; ++i) dot += xk[i] * wk[i];
        shadow_e_[k] = d_all[k] - dot;
      }
    }

    IterationStats stats;
    for (int k = 0; k < v_; ++k) stats.v_s += sbar_[k];
    stats.v_t = cfg_.algorithm == AlgorithmKind::kAscDnlms ? stats.v_s : v_;

    if (acw_) acw_->update(psi_, w_, sbar_, weights_);

    if (uses_sampling_controller(cfg_.algorithm)) {
      for (int k = 0; k < v_; ++k) {
        double nb = 0.0;
        for (int i : topo_->neighbors(k)) nb += weights_(i, k) * eps_sq_[i];
        double pp = phi_lut_ ? (*phi_lut_)(alpha_[k]) : phi_prime(alpha_[k], cfg_.alpha_plus);
        alpha_[k] = alpha_update(alpha_[k], nb, sbar_[k] != 0, cfg_.beta, cfg_.mu_s,
                                 cfg_.alpha_plus, pp);
      }
    }

    combine_step(*topo_, weights_, psi_, w_next_, m_);
    w_.swap(w_next_);

    for (int k = 0; k < v_; ++k) stats.ops += node_op_cost(k);
    return stats;
  }

  nlohmann::json snapshot() const {
    nlohmann::json j;
    auto rows = [this](const std::vector<double>& flat) {
      nlohmann::json arr = nlohmann::json::array();
      for (int k = 0; k < v_; ++k) {
        nlohmann::json row = nlohmann::json::array();
        for (int i = 0; i < m_; ++i) row.push_back(flat[static_cast<std::size_t>(k) * m_ + i]);
        arr.push_back(std::move(row));
      }
      return arr;
    };
    j["w"] = rows(w_);
    j["psi"] = rows(psi_);
    j["alpha"] = alpha_;
    j["sbar"] = sbar_;
    j["eps_sq"] = eps_sq_;
    return j;
  }

 private:
  void decide_sampling() {
    switch (cfg_.algorithm) {
      case AlgorithmKind::kDnlmsFull:
        for (int k = 0; k < v_; ++k) sbar_[k] = 1;
        break;
      case AlgorithmKind::kDnlmsRandom:
        random_sampling_schedule(v_, cfg_.sampled_nodes, schedule_rng_, sbar_);
        break;
      case AlgorithmKind::kAsDnlms:
      case AlgorithmKind::kAscDnlms:
        for (int k = 0; k < v_; ++k) sbar_[k] = sampling_indicator(alpha_[k]);
        break;
    }
  }

  OpCount node_op_cost(int k) const {
    const int nk = topo_->neighborhood_size(k);
    switch (cfg_.algorithm) {
      case AlgorithmKind::kDnlmsFull:
        return op_cost(CostModel::kDnlms, m_, nk, 1);
      case AlgorithmKind::kDnlmsRandom: {
        OpCount c = op_cost(CostModel::kDnlms, m_, nk, 1);
        if (!sbar_[k]) {
          // skipped adaptation branch: x' w, mu, psi update, ||x||^2 refresh
          c.mults -= 2 * m_ + 3;
          c.sums -= 2 * m_ + 2;
          c.divs -= 1;
        }
        return c;
      }
      case AlgorithmKind::kAsDnlms:
      case AlgorithmKind::kAscDnlms:
        return op_cost(CostModel::kAsDnlms, m_, nk, sbar_[k]);
    }
    return {};
  }

  const NetworkTopology* topo_;
  int v_;
  int m_;
  EngineConfig cfg_;
  std::vector<double> mu_tilde_;
  CombinationMatrix weights_;
  std::optional<AcwState> acw_;
  std::optional<PhiPrimeTable> phi_lut_;

  std::vector<double> w_;
  std::vector<double> w_next_;
  std::vector<double> psi_;
  std::vector<double> alpha_;
  std::vector<int> sbar_;
  std::vector<double> eps_sq_;
  std::vector<double> shadow_e_;
  Rng schedule_rng_;
};

}  // namespace diffnet
