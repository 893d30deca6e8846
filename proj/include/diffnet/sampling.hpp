#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace diffnet {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Normalized sigmoid mapping the auxiliary variable onto [0, 1]:
/// phi(-alpha_plus) = 0, phi(0) = 0.5, phi(alpha_plus) = 1.
inline double phi(double alpha, double alpha_plus) {
  double lo = sigmoid(-alpha_plus);
  return (sigmoid(alpha) - lo) / (sigmoid(alpha_plus) - lo);
}

/// Derivative of phi; always positive and even in alpha.
inline double phi_prime(double alpha, double alpha_plus) {
  double s = sigmoid(alpha);
  return s * (1.0 - s) / (sigmoid(alpha_plus) - sigmoid(-alpha_plus));
}

/// Nearest-entry table over [-alpha_plus, alpha_plus] for phi_prime, the
/// form a node would realistically deploy; accuracy is a few 1e-4 at 1024
/// entries. Off by default, the closed form keeps tests exact.
class PhiPrimeTable {
 public:
  explicit PhiPrimeTable(double alpha_plus) : alpha_plus_(alpha_plus) {
    for (std::size_t i = 0; i < kSize; ++i) {
      double a = -alpha_plus + 2.0 * alpha_plus * static_cast<double>(i) /
                                   static_cast<double>(kSize - 1);
      table_[i] = phi_prime(a, alpha_plus);
    }
  }

  double operator()(double alpha) const {
    double t = (alpha + alpha_plus_) / (2.0 * alpha_plus_) * static_cast<double>(kSize - 1);
    long i = std::lround(t);
    if (i < 0) i = 0;
    if (i >= static_cast<long>(kSize)) i = kSize - 1;
    return table_[static_cast<std::size_t>(i)];
  }

  static constexpr std::size_t kSize = 1024;

 private:
  double alpha_plus_;
  std::array<double, kSize> table_;
};

/// Sign test deciding the sampling of a node; ties sample.
inline int sampling_indicator(double alpha) { return alpha >= 0.0 ? 1 : 0; }

/// One stochastic-gradient step of the auxiliary variable:
///   alpha <- alpha + mu_s * phi'(alpha) * (neighborhood_err_sq - beta * sampled)
/// saturating at +/- alpha_plus. neighborhood_err_sq is the combination-
/// weighted sum of the latest squared errors over the neighborhood.
inline double alpha_update(double alpha, double neighborhood_err_sq, bool sampled, double beta,
                           double mu_s, double alpha_plus, double phi_prime_value) {
  double next = alpha + mu_s * phi_prime_value * (neighborhood_err_sq - (sampled ? beta : 0.0));
  if (next > alpha_plus) return alpha_plus;
  if (next < -alpha_plus) return -alpha_plus;
  return next;
}

inline double alpha_update(double alpha, double neighborhood_err_sq, bool sampled, double beta,
                           double mu_s, double alpha_plus) {
  return alpha_update(alpha, neighborhood_err_sq, sampled, beta, mu_s, alpha_plus,
                      phi_prime(alpha, alpha_plus));
}

}  // namespace diffnet
