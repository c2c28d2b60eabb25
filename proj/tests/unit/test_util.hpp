#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include "shadowrt/qarith.hpp"

namespace test_util {

inline double rel(std::complex<double> a, std::complex<double> b) {
  double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline double rel(double a, double b) {
  double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

// exp((r / (4 pi i)) x), the exponential that recurs in the dilogarithm identities.
inline std::complex<double> qexp(int r, std::complex<double> x) {
  return std::exp(x * static_cast<double>(r) / (4.0 * shadowrt::kPi * std::complex<double>(0.0, 1.0)));
}

// Plain complex arithmetic, no log space and no shared tables.
inline std::complex<double> naive_qint(int r, int n) { return std::sin(shadowrt::kTwoPi * n / r) / std::sin(shadowrt::kTwoPi / r); }

inline std::complex<double> naive_fact(int r, int n) {
  std::complex<double> p = 1.0;
  for (int k = 1; k <= n; ++k) p *= naive_qint(r, k);
  return p;
}

inline std::complex<double> naive_delta(int r, int a, int b, int c) {
  int t = (a + b + c) / 2;
  double x = (naive_fact(r, t - a) * naive_fact(r, t - b) * naive_fact(r, t - c) / naive_fact(r, t + 1)).real();
  return x >= 0 ? std::complex<double>(std::sqrt(x), 0.0) : std::complex<double>(0.0, std::sqrt(-x));
}

inline std::complex<double> naive_sixj(int r, const std::array<int, 6>& m) {
  int t[4] = {(m[0] + m[1] + m[2]) / 2, (m[0] + m[4] + m[5]) / 2, (m[1] + m[3] + m[5]) / 2,
              (m[2] + m[3] + m[4]) / 2};
  int q[3] = {(m[0] + m[1] + m[3] + m[4]) / 2, (m[0] + m[2] + m[3] + m[5]) / 2,
              (m[1] + m[2] + m[4] + m[5]) / 2};
  int lo = std::max({t[0], t[1], t[2], t[3]});
  int hi = std::min({q[0], q[1], q[2], r - 2});
  std::complex<double> sum = 0.0;
  for (int k = lo; k <= hi; ++k) {
    std::complex<double> term = (k % 2 ? -1.0 : 1.0) * naive_fact(r, k + 1);
    for (int x : t) term /= naive_fact(r, k - x);
    for (int y : q) term /= naive_fact(r, y - k);
    sum += term;
  }
  int total = m[0] + m[1] + m[2] + m[3] + m[4] + m[5];
  std::complex<double> pre = std::pow(std::complex<double>(0.0, 1.0), -total);
  pre *= naive_delta(r, m[0], m[1], m[2]) * naive_delta(r, m[0], m[4], m[5]) *
         naive_delta(r, m[1], m[3], m[5]) * naive_delta(r, m[2], m[3], m[4]);
  return pre * sum;
}

}  // namespace test_util
