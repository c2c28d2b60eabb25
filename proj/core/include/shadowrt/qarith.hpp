#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace shadowrt {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;
// Volume of the regular ideal octahedron, 8 * Lobachevsky(pi/4).
inline constexpr double kOctahedronVolume = 3.66386237670887606021841405972953;

enum class Precision { standard, extended };

// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;

  DoubleDouble() = default;
  DoubleDouble(double h) : hi(h) {}  // NOLINT(google-explicit-constructor)
  DoubleDouble(double h, double l) : hi(h), lo(l) {}

  double value() const { return hi + lo; }
  DoubleDouble& operator+=(const DoubleDouble& b);
  DoubleDouble& operator-=(const DoubleDouble& b);
  friend DoubleDouble operator+(DoubleDouble a, const DoubleDouble& b) { return a += b; }
  friend DoubleDouble operator-(DoubleDouble a, const DoubleDouble& b) { return a -= b; }
  DoubleDouble operator-() const { return {-hi, -lo}; }
};

// Nonzero complex number kept as exp(log_mag + i*phase). The phase is left
// unreduced while values are multiplied together; arg() canonicalizes it.
class LogComplex {
 public:
  LogComplex() = default;
  LogComplex(double log_mag, double phase);

  static LogComplex zero() { return {}; }
  static LogComplex one() { return {0.0, 0.0}; }
  static LogComplex from_complex(cplx z);
  static LogComplex from_real(double x) { return from_complex(cplx(x, 0.0)); }

  double log_mag() const { return log_mag_; }
  double raw_phase() const { return phase_; }
  double arg() const;  // in (-pi, pi]; 0 for zero
  bool is_zero() const { return log_mag_ == -std::numeric_limits<double>::infinity(); }
  cplx value() const;

  LogComplex& operator*=(const LogComplex& b);
  LogComplex& operator/=(const LogComplex& b);
  friend LogComplex operator*(LogComplex a, const LogComplex& b) { return a *= b; }
  friend LogComplex operator/(LogComplex a, const LogComplex& b) { return a /= b; }
  LogComplex operator-() const;
  LogComplex conj() const;
  LogComplex pow(double e) const;
  LogComplex sqrt() const { return pow(0.5); }

  // Multiply by exp(i*theta) without touching the magnitude.
  LogComplex rotated(double theta) const;
  LogComplex scaled_log(double dlog) const;

 private:
  double log_mag_ = -std::numeric_limits<double>::infinity();
  double phase_ = 0.0;
};

// Relative distance |a-b|/max(|a|,|b|) evaluated in log space.
double relative_difference(const LogComplex& a, const LogComplex& b);

// Level data for q = exp(2 pi i / r), plus factorial tables on [0, r-2].
class RootContext {
 public:
  explicit RootContext(int r, Precision precision = Precision::standard);

  int r() const { return r_; }
  cplx q() const { return q_; }
  double mu_r() const { return mu_r_; }
  Precision precision() const { return precision_; }

  // log|[n]!| and the number of negative factors mod 2, for n in [0, r-1].
  double log_abs_qfact(int n) const { return log_qfact_[static_cast<std::size_t>(n)].value(); }
  const DoubleDouble& log_abs_qfact_dd(int n) const { return log_qfact_[static_cast<std::size_t>(n)]; }
  int qfact_parity(int n) const { return qfact_parity_[static_cast<std::size_t>(n)]; }
  // log prod_{k<=n} 2 sin(pi k / r), for n in [0, r-1].
  double log_abs_bfact(int n) const { return log_bfact_[static_cast<std::size_t>(n)]; }

  // q^{x} for a real exponent, as a pure phase exp(2 pi i x / r).
  LogComplex q_power(double x) const;

 private:
  int r_;
  Precision precision_;
  cplx q_;
  double mu_r_;
  std::vector<DoubleDouble> log_qfact_;
  std::vector<int> qfact_parity_;
  std::vector<double> log_bfact_;
};

// sin(pi * num / den) with the argument reduced exactly in integers first.
double sin_pi_ratio(long long num, long long den);

double quantum_integer(const RootContext& ctx, long long n);
LogComplex quantum_factorial(const RootContext& ctx, int n);
cplx braced(const RootContext& ctx, long long n);
LogComplex braced_factorial(const RootContext& ctx, int n);

// q^n - q^{-n} = 2i sin(2 pi n / r), the difference used by the Hopf pairing
// [x] = (q^x - q^{-x})/(q - q^{-1}) and by the quantum-dilogarithm factorial
// identities.
cplx qdiff(const RootContext& ctx, long long n);
// prod_{k=1}^n (q^k - q^{-k}) for n in [0, r-2].
LogComplex qdiff_factorial(const RootContext& ctx, int n);

// Sum of log-space terms: rescale by the largest magnitude, Neumaier-compensated
// complex accumulation, renormalize. Deterministic for a fixed input order.
LogComplex log_sum(std::span<const LogComplex> terms,
                   Precision precision = Precision::standard);

// Combines partial sums along a fixed pairwise tree: (0,1),(2,3),... then the
// same on the results. The shape depends only on the number of inputs.
LogComplex tree_reduce(std::vector<LogComplex> partials,
                       Precision precision = Precision::standard);

// Streaming counterpart of log_sum for kernels that cannot buffer terms.
class LogAccumulator {
 public:
  explicit LogAccumulator(Precision precision = Precision::standard)
      : precision_(precision) {}
  void add(const LogComplex& t);
  LogComplex result() const;

 private:
  void rescale(double new_scale);
  Precision precision_;
  double scale_ = -std::numeric_limits<double>::infinity();
  DoubleDouble re_, im_;
  double re_c_ = 0.0, im_c_ = 0.0;
};

}  // namespace shadowrt
