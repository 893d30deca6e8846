#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "diffnet/sampling.hpp"

namespace diffnet {

/// beta thresholds for sampling to cease in steady state: above sigma_min_sq
/// is necessary, above sigma_max_sq is sufficient. They coincide for a
/// homogeneous noise profile.
struct BetaConditions {
  double necessary;
  double sufficient;
};

inline BetaConditions beta_conditions(double sigma_min_sq, double sigma_max_sq) {
  if (!(sigma_min_sq > 0.0) || sigma_max_sq < sigma_min_sq)
    throw std::invalid_argument("beta_conditions: need 0 < sigma_min_sq <= sigma_max_sq");
  return {sigma_min_sq, sigma_max_sq};
}

/// Steady-state duty-cycle model. theta bounds the expected sampled
/// iterations per on/off cycle, theta_bar the unsampled ones; each is
/// clamped below at 1 since a cycle contains at least one iteration of each
/// kind. The resulting per-node sampling probability bounds reduce to
/// sigma^2 / beta, clamped to 1.
struct DutyCycleBounds {
  double theta_max;
  double theta_min;
  double theta_bar_max;
  double theta_bar_min;
  double p_hat_min;
  double p_hat_max;
};

inline DutyCycleBounds duty_cycle_bounds(double beta, double sigma_min_sq, double sigma_max_sq) {
  if (!(beta > 0.0)) throw std::invalid_argument("duty_cycle_bounds: beta must be > 0");
  if (!(sigma_min_sq > 0.0) || sigma_max_sq < sigma_min_sq)
    throw std::invalid_argument("duty_cycle_bounds: need 0 < sigma_min_sq <= sigma_max_sq");

  auto ratio_or = [](double num, double den) {
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    return num / den;
  };
  DutyCycleBounds b;
  b.theta_max = std::max(ratio_or(sigma_max_sq, beta - sigma_max_sq), 1.0);
  b.theta_min = std::max(ratio_or(sigma_min_sq, beta - sigma_min_sq), 1.0);
  b.theta_bar_max = std::max((beta - sigma_min_sq) / sigma_min_sq, 1.0);
  b.theta_bar_min = std::max((beta - sigma_max_sq) / sigma_max_sq, 1.0);
  b.p_hat_min = std::min(sigma_min_sq / beta, 1.0);
  b.p_hat_max = std::min(sigma_max_sq / beta, 1.0);
  return b;
}

/// Bounds on the expected number of sampled nodes in steady state.
struct SampledBounds {
  double lower;
  double upper;
};

inline SampledBounds expected_sampled_bounds(int node_count, double beta, double sigma_min_sq,
                                             double sigma_max_sq) {
  DutyCycleBounds b = duty_cycle_bounds(beta, sigma_min_sq, sigma_max_sq);
  return {node_count * b.p_hat_min, node_count * b.p_hat_max};
}

/// Smallest sampling step size that stops sampling within delta_n iterations
/// of the error floor being reached, assuming beta exceeds the worst noise
/// power. Evaluated from the sigmoid-derivative endpoints for the configured
/// alpha cap, so caps other than 4 remain valid.
inline double min_step_size_mu_s(double alpha_plus, double beta, double sigma_max_sq,
                                 double delta_n) {
  if (!(beta > sigma_max_sq))
    throw std::invalid_argument("min_step_size_mu_s: requires beta > sigma_max_sq");
  if (!(delta_n >= 1.0)) throw std::invalid_argument("min_step_size_mu_s: delta_n must be >= 1");
  double p0 = phi_prime(0.0, alpha_plus);
  double pa = phi_prime(alpha_plus, alpha_plus);
  return alpha_plus / ((beta - sigma_max_sq) * (p0 - pa)) *
         (std::pow(p0 / pa, 1.0 / delta_n) - 1.0);
}

enum class CostModel { kDnlms, kAsDnlms };

/// Modeled per-node operation counts for one iteration (classical signal
/// model with adaptive combination weights).
struct OpCount {
  long long mults = 0;
  long long sums = 0;
  long long divs = 0;
  long long comparisons = 0;

  OpCount& operator+=(const OpCount& o) {
    mults += o.mults;
    sums += o.sums;
    divs += o.divs;
    comparisons += o.comparisons;
    return *this;
  }
};

inline OpCount op_cost(CostModel algorithm, int order, int neighborhood_size, int sbar) {
  if (order < 1 || neighborhood_size < 1)
    throw std::invalid_argument("op_cost: order and neighborhood size must be >= 1");
  const long long m = order, nk = neighborhood_size, s = sbar ? 1 : 0;
  OpCount c;
  switch (algorithm) {
    case CostModel::kDnlms:
      c.mults = m * (3 + nk) + 4;
      c.sums = m * (3 + nk) + 3;
      c.divs = nk;
      c.comparisons = 0;
      break;
    case CostModel::kAsDnlms:
      c.mults = s * (2 * m + 2) + m * (1 + nk) + nk + 4;
      c.sums = s * (2 * m + 2) + m * (nk + 1) + nk + 2;
      c.divs = nk + s - 1;
      c.comparisons = 2;
      break;
  }
  return c;
}

/// Expected network-wide multiplication savings of the sampling algorithm
/// over plain diffusion, from the analysis model: for each node,
/// 2M - 2(M+2) E{sbar_k} - |N_k|, summed over the network. (The tabulated
/// per-iteration counts imply a per-node difference of 2M - (2M+2) sbar -
/// |N_k| instead; the two disagree by 2 sbar and both are kept as published,
/// this one driving the beta threshold below.)
inline double expected_mult_savings(int order, std::span<const int> neighborhood_sizes,
                                    std::span<const double> sbar_mean) {
  double total = 0.0;
  for (std::size_t k = 0; k < neighborhood_sizes.size(); ++k) {
    total += 2.0 * order - 2.0 * (order + 2) * sbar_mean[k] - neighborhood_sizes[k];
  }
  return total;
}

/// Sufficient condition for the sampling algorithm to beat plain diffusion
/// on multiplications: feasible only when the filter order exceeds
/// sum |N_k| / (2V), in which case any beta above the threshold works.
struct CostAdvantage {
  bool feasible;
  double m_min;
  double beta_threshold;  // meaningful only when feasible
};

inline CostAdvantage cost_advantage_conditions(int node_count, int order,
                                               long long sum_neighborhoods,
                                               double sigma_max_sq) {
  if (node_count < 1 || order < 1 || sum_neighborhoods < node_count || !(sigma_max_sq > 0.0))
    throw std::invalid_argument("cost_advantage_conditions: invalid arguments");
  CostAdvantage r;
  r.m_min = static_cast<double>(sum_neighborhoods) / (2.0 * node_count);
  r.feasible = static_cast<double>(order) > r.m_min;
  r.beta_threshold = 0.0;
  if (r.feasible) {
    r.beta_threshold = 2.0 * node_count * (order + 2) * sigma_max_sq /
                       (2.0 * node_count * order - static_cast<double>(sum_neighborhoods));
  }
  return r;
}

}  // namespace diffnet
