#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "diffnet/rng.hpp"
#include "diffnet/shift.hpp"

namespace diffnet {

/// Coefficients i.i.d. uniform on [-1, 1].
inline std::vector<double> generate_optimal_system(int order, std::uint64_t seed) {
  if (order < 1) throw std::invalid_argument("generate_optimal_system: order must be >= 1");
  Rng rng(seed, 0, 0, StreamPurpose::kSystem);
  std::vector<double> w(order);
  for (double& t : w) t = rng.uniform(-1.0, 1.0);
  return w;
}

inline void abrupt_flip(std::span<double> w) {
  for (double& t : w) t = -t;
}

/// w <- w + q, q ~ N(0, sigma_q_sq * I).
inline void random_walk_update(std::span<double> w, double sigma_q_sq, Rng& stream) {
  if (sigma_q_sq < 0.0) throw std::invalid_argument("random_walk_update: variance must be >= 0");
  if (sigma_q_sq == 0.0) return;
  double sd = std::sqrt(sigma_q_sq);
  for (double& t : w) t += sd * stream.gaussian();
}

struct NoiseProfile {
  std::vector<double> sigma_v_sq;

  double min_sq() const { return *std::min_element(sigma_v_sq.begin(), sigma_v_sq.end()); }
  double max_sq() const { return *std::max_element(sigma_v_sq.begin(), sigma_v_sq.end()); }
  double mean_sq() const {
    double s = 0.0;
    for (double t : sigma_v_sq) s += t;
    return s / static_cast<double>(sigma_v_sq.size());
  }

  void validate() const {
    if (sigma_v_sq.empty()) throw std::invalid_argument("noise profile: empty");
    for (double t : sigma_v_sq) {
      if (!(t > 0.0)) throw std::invalid_argument("noise profile: variances must be > 0");
    }
  }
};

/// Heterogeneous profile: a seeded uniform draw on [low, high]. With
/// pin_range the draw is rescaled affinely so the extreme nodes sit exactly
/// at low and high, which keeps beta_r * sigma_max products exact.
inline NoiseProfile draw_noise_profile(int node_count, double low, double high,
                                       std::uint64_t seed, bool pin_range = true,
                                       double scale = 1.0) {
  if (!(low > 0.0) || high < low)
    throw std::invalid_argument("draw_noise_profile: need 0 < low <= high");
  NoiseProfile p;
  p.sigma_v_sq.resize(node_count);
  Rng rng(seed, 0, 0, StreamPurpose::kNoiseProfile);
  for (double& t : p.sigma_v_sq) t = rng.uniform(low, high);
  if (pin_range && node_count >= 2 && high > low) {
    double mn = p.min_sq(), mx = p.max_sq();
    for (double& t : p.sigma_v_sq)
      t = low + (high - low) * (t - mn) / (mx - mn);
  }
  for (double& t : p.sigma_v_sq) t *= scale;
  p.validate();
  return p;
}

enum class FilterMode { kClassical, kGraph };

/// Produces the per-node regressors x_k(n), either as tapped-delay lines on
/// each node's own input (classical) or by running the input field through
/// the shift-and-delay pipeline (graph). Prehistory is zero.
///
/// Graph mode keeps M shifted state vectors z_m with z_0(n) = u(n) and
/// z_m(n) = A z_{m-1}(n-1); updating them top-down reuses the previous
/// iteration's values in place, costing O(M |edges|) per step with no dense
/// powers. x_k(n) is then row k of [z_0 ... z_{M-1}].
class RegressorPipeline {
 public:
  RegressorPipeline(FilterMode mode, int node_count, int order, const ShiftOperator* shift)
      : mode_(mode),
        v_(node_count),
        m_(order),
        shift_(shift),
        state_(static_cast<std::size_t>(order) * node_count, 0.0) {
    if (order < 1) throw std::invalid_argument("regressor: order must be >= 1");
    if (mode == FilterMode::kGraph) {
      if (shift == nullptr) throw std::invalid_argument("regressor: graph mode needs a shift operator");
      if (shift->node_count() != node_count)
        throw std::invalid_argument("regressor: shift dimension != V");
    }
  }

  int node_count() const { return v_; }
  int order() const { return m_; }
  FilterMode mode() const { return mode_; }

  /// Advance one iteration with the fresh input sample of every node, then
  /// write x_k(n) into row k of `x_out` (V rows of length M).
  void step(std::span<const double> u_new, std::span<double> x_out) {
    if (static_cast<int>(u_new.size()) != v_)
      throw std::invalid_argument("regressor: input length != V");
    if (x_out.size() != static_cast<std::size_t>(v_) * m_)
      throw std::invalid_argument("regressor: output size != V*M");

    if (mode_ == FilterMode::kClassical) {
      // state_ row m holds u(n-m); shift rows down, insert the new sample
      for (int m = m_ - 1; m >= 1; --m) {
        double* cur = row(m);
        const double* prev = row(m - 1);
        for (int k = 0; k < v_; ++k) cur[k] = prev[k];
      }
      double* top = row(0);
      for (int k = 0; k < v_; ++k) top[k] = u_new[k];
    } else {
      // z_m(n) = A z_{m-1}(n-1): top-down order reads last iteration's rows
      for (int m = m_ - 1; m >= 1; --m) {
        shift_->apply({row(m - 1), static_cast<std::size_t>(v_)},
                      {row(m), static_cast<std::size_t>(v_)});
      }
      double* top = row(0);
      for (int k = 0; k < v_; ++k) top[k] = u_new[k];
    }

    for (int k = 0; k < v_; ++k) {
      double* xk = x_out.data() + static_cast<std::size_t>(k) * m_;
      for (int m = 0; m < m_; ++m) xk[m] = row(m)[k];
    }
  }

 private:
  double* row(int m) { return state_.data() + static_cast<std::size_t>(m) * v_; }
  const double* row(int m) const { return state_.data() + static_cast<std::size_t>(m) * v_; }

  FilterMode mode_;
  int v_;
  int m_;
  const ShiftOperator* shift_;
  std::vector<double> state_;  // M rows of length V; row m is z_m / u(n-m)
};

/// Tapped-delay regressor from a single node's history (newest sample last
/// in `history`); zero-padded before the start.
inline std::vector<double> classical_regressor(std::span<const double> history, int order) {
  if (order < 1) throw std::invalid_argument("classical_regressor: order must be >= 1");
  std::vector<double> x(order, 0.0);
  const int n = static_cast<int>(history.size());
  for (int m = 0; m < order; ++m) {
    int idx = n - 1 - m;
    if (idx >= 0) x[m] = history[idx];
  }
  return x;
}

/// d_k(n) = x_k(n)' w_o + v_k(n).
inline double desired_signal(std::span<const double> x_k, std::span<const double> w_o,
                             double sigma_v_sq_k, Rng& noise_stream) {
  if (x_k.size() != w_o.size()) throw std::invalid_argument("desired_signal: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x_k.size(); ++i) acc += x_k[i] * w_o[i];
  return acc + std::sqrt(sigma_v_sq_k) * noise_stream.gaussian();
}

}  // namespace diffnet
