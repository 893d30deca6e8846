#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "diffnet/theory.hpp"

namespace diffnet {

/// Per-iteration snapshot. Metrics are stored linearly; dB conversion
/// happens only at output time.
struct IterationRecord {
  double nmsd = 0.0;
  double nmse = 0.0;
  double v_s = 0.0;
  double v_t = 0.0;
  double mults = 0.0;
  double sums = 0.0;
  double divs = 0.0;
  double comparisons = 0.0;

  IterationRecord& operator+=(const IterationRecord& o) {
    nmsd += o.nmsd;
    nmse += o.nmse;
    v_s += o.v_s;
    v_t += o.v_t;
    mults += o.mults;
    sums += o.sums;
    divs += o.divs;
    comparisons += o.comparisons;
    return *this;
  }

  IterationRecord& operator/=(double r) {
    nmsd /= r;
    nmse /= r;
    v_s /= r;
    v_t /= r;
    mults /= r;
    sums /= r;
    divs /= r;
    comparisons /= r;
    return *this;
  }

  bool finite() const {
    return std::isfinite(nmsd) && std::isfinite(nmse);
  }
};

inline double to_db(double linear) {
  return 10.0 * std::log10(std::max(linear, 1e-300));
}

/// (1/V) sum_k ||w_o - w_k||^2; w_all holds one order-length row per node.
inline double nmsd(std::span<const double> w_all, std::span<const double> w_o) {
  const std::size_t m = w_o.size();
  if (m == 0 || w_all.size() % m != 0) throw std::invalid_argument("nmsd: length mismatch");
  const std::size_t v = w_all.size() / m;
  double total = 0.0;
  for (std::size_t k = 0; k < v; ++k) {
    const double* wk = w_all.data() + k * m;
    for (std::size_t i = 0; i < m; ++i) {
      double d = w_o[i] - wk[i];
      total += d * d;
    }
  }
  return total / static_cast<double>(v);
}

/// (1/V) sum_k e_k^2 over the shadow errors of all nodes.
inline double nmse(std::span<const double> errors) {
  if (errors.empty()) throw std::invalid_argument("nmse: empty");
  double total = 0.0;
  for (double e : errors) total += e * e;
  return total / static_cast<double>(errors.size());
}

/// Causal moving average; the warm-up prefix averages over what exists.
inline std::vector<double> moving_average(std::span<const double> series, int window = 64) {
  if (window < 1) throw std::invalid_argument("moving_average: window must be >= 1");
  std::vector<double> out(series.size());
  double acc = 0.0;
  for (std::size_t n = 0; n < series.size(); ++n) {
    acc += series[n];
    if (n >= static_cast<std::size_t>(window)) acc -= series[n - window];
    std::size_t count = std::min<std::size_t>(n + 1, window);
    out[n] = acc / static_cast<double>(count);
  }
  return out;
}

/// Mean of each metric over the final `window` records.
inline IterationRecord steady_state_summary(std::span<const IterationRecord> records,
                                            int window = 600) {
  if (window < 1 || records.size() < static_cast<std::size_t>(window))
    throw std::invalid_argument("steady_state_summary: series shorter than window");
  IterationRecord mean;
  for (std::size_t n = records.size() - window; n < records.size(); ++n) mean += records[n];
  mean /= static_cast<double>(window);
  return mean;
}

/// Elementwise network total of per-node modeled operation counts.
inline OpCount accumulate_ops(std::span<const OpCount> per_node) {
  OpCount total;
  for (const OpCount& c : per_node) total += c;
  return total;
}

}  // namespace diffnet
