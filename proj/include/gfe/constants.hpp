// Closed-form constants: centering sequences and tail exponents for the 2D fields.
#pragma once

#include <cmath>
#include <stdexcept>

namespace gfe::constants {

inline constexpr double pi = 3.14159265358979323846;

/** Dyadic BRW drift constant c* = 2 sqrt(log 2). */
inline double c_star() { return 2.0 * std::sqrt(std::log(2.0)); }

/** Log-correction constant (3/2) / c*. */
inline double c_bar() { return 1.5 / c_star(); }

/** BRW centering t_n = c* n - c_bar log n. */
inline double t_n(int n) {
  if (n < 1) throw std::invalid_argument("t_n: n must be >= 1");
  return c_star() * n - c_bar() * std::log(static_cast<double>(n));
}

/** GFF max centering m_N = 2 sqrt(2/pi) (log N - (3/8) log log N). */
inline double m_n(int N) {
  if (N < 3) throw std::invalid_argument("m_n: N must be >= 3");
  double lg = std::log(static_cast<double>(N));
  return 2.0 * std::sqrt(2.0 / pi) * (lg - 0.375 * std::log(lg));
}

/** Slope of m_N in log N: 2 sqrt(2/pi). */
inline double m_n_slope() { return 2.0 * std::sqrt(2.0 / pi); }

/** Rescaled centering m~_N = sqrt(pi / (2 log 2)) m_N (BRW normalization). */
inline double m_tilde(int N) { return std::sqrt(pi / (2.0 * std::log(2.0))) * m_n(N); }

/** Right-tail exponent of the centered GFF maximum: sqrt(2 pi). */
inline double right_tail_exponent() { return std::sqrt(2.0 * pi); }

/** Variance slope of the GFF along log distance: 2 log 2 / pi per dyadic level. */
inline double log_distance_slope() { return 2.0 * std::log(2.0) / pi; }

}  // namespace gfe::constants
