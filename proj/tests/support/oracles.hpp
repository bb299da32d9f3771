#pragma once

// Reference computations written independently of the library: direct sums,
// closed forms evaluated the long way, quadrature. Slow but transparent.

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

inline long double choose(unsigned n, unsigned k) {
  long double c = 1.0L;
  for (unsigned i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

/// P[Bin(l, p) >= k], term by term. Fine for l <= 60.
inline double binom_tail(unsigned l, double p, unsigned k) {
  long double s = 0.0L;
  for (unsigned i = k; i <= l; ++i) {
    s += choose(l, i) * std::pow(static_cast<long double>(p), i) *
         std::pow(1.0L - p, static_cast<long double>(l - i));
  }
  return static_cast<double>(s);
}

/// Exact P[strictly more than half of l labels correct] when each flips w.p. e.
inline double strict_majority_correct(unsigned l, double e) {
  return binom_tail(l, 1.0 - e, l / 2 + 1);
}

inline double kl_bernoulli(double a, double b) {
  auto term = [](double x, double y) { return x == 0.0 ? 0.0 : x * std::log(x / y); };
  return term(a, b) + term(1.0 - a, 1.0 - b);
}

/// tau_l with plain powers; only meaningful while nothing underflows.
inline double tau_direct(const std::vector<double>& values, unsigned n, unsigned l) {
  long double num = 0.0L, den = 0.0L;
  for (double v : values) {
    const long double a = v;
    const long double base = std::pow(a, static_cast<long double>(l)) *
                             std::pow(1.0L - a, static_cast<long double>(n - l));
    num += base * a;
    den += base;
  }
  return static_cast<double>(num / den);
}

/// Mean of N(mu, s^2) truncated to [lo, hi] by composite Simpson's rule.
inline double truncated_normal_mean(double mu, double s, double lo, double hi,
                                    int panels = 20000) {
  const double h = (hi - lo) / panels;
  double m0 = 0.0, m1 = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double x = lo + i * h;
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double z = (x - mu) / s;
    const double f = std::exp(-0.5 * z * z);
    m0 += w * f;
    m1 += w * f * x;
  }
  return m1 / m0;
}

/// I(x; y) of a row-major joint table.
inline double mutual_information(const std::vector<double>& joint, std::size_t rows,
                                 std::size_t cols) {
  std::vector<double> px(rows, 0.0), py(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      px[i] += joint[i * cols + j];
      py[j] += joint[i * cols + j];
    }
  double mi = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double p = joint[i * cols + j];
      if (p > 0.0) mi += p * std::log(p / (px[i] * py[j]));
    }
  return mi;
}

/// KL between two row-major tables of equal shape.
inline double kl_table(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) s += p[i] * std::log(p[i] / q[i]);
  return s;
}

}  // namespace oracle
