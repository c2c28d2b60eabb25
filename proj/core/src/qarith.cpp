#include "shadowrt/qarith.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shadowrt/errors.hpp"

namespace shadowrt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  double bb = s - a;
  e = (a - (s - bb)) + (b - bb);
}

inline void neumaier_add(double& sum, double& comp, double x) {
  double t = sum + x;
  if (std::abs(sum) >= std::abs(x)) {
    comp += (sum - t) + x;
  } else {
    comp += (x - t) + sum;
  }
  sum = t;
}

double canonical_phase(double phase) {
  double p = std::remainder(phase, kTwoPi);
  if (p <= -kPi) p += kTwoPi;
  return p;
}

void check_factorial_range(const RootContext& ctx, int n, const char* what) {
  if (n < 0 || n > ctx.r() - 2) {
    throw DomainError(std::string(what) + ": argument " + std::to_string(n) +
                      " outside [0, " + std::to_string(ctx.r() - 2) + "]");
  }
}

}  // namespace

DoubleDouble& DoubleDouble::operator+=(const DoubleDouble& b) {
  double s, e;
  two_sum(hi, b.hi, s, e);
  double t, f;
  two_sum(lo, b.lo, t, f);
  e += t;
  double h = s + e;
  e = e - (h - s);
  e += f;
  hi = h + e;
  lo = e - (hi - h);
  return *this;
}

DoubleDouble& DoubleDouble::operator-=(const DoubleDouble& b) { return *this += -b; }

LogComplex::LogComplex(double log_mag, double phase) : log_mag_(log_mag), phase_(phase) {
  if (log_mag_ == kNegInf) phase_ = 0.0;
}

LogComplex LogComplex::from_complex(cplx z) {
  if (z == cplx(0.0, 0.0)) return zero();
  return {std::log(std::abs(z)), std::arg(z)};
}

double LogComplex::arg() const { return is_zero() ? 0.0 : canonical_phase(phase_); }

cplx LogComplex::value() const {
  if (is_zero()) return {0.0, 0.0};
  return std::polar(std::exp(log_mag_), arg());
}

LogComplex& LogComplex::operator*=(const LogComplex& b) {
  if (is_zero() || b.is_zero()) {
    *this = zero();
    return *this;
  }
  log_mag_ += b.log_mag_;
  phase_ += b.phase_;
  return *this;
}

LogComplex& LogComplex::operator/=(const LogComplex& b) {
  if (b.is_zero()) throw DomainError("LogComplex division by zero");
  if (is_zero()) return *this;
  log_mag_ -= b.log_mag_;
  phase_ -= b.phase_;
  return *this;
}

LogComplex LogComplex::operator-() const {
  if (is_zero()) return *this;
  return {log_mag_, phase_ + kPi};
}

LogComplex LogComplex::conj() const {
  if (is_zero()) return *this;
  return {log_mag_, -phase_};
}

LogComplex LogComplex::pow(double e) const {
  if (is_zero()) {
    if (e > 0) return zero();
    throw DomainError("LogComplex: non-positive power of zero");
  }
  // Principal branch: canonicalize before scaling the phase.
  return {log_mag_ * e, arg() * e};
}

LogComplex LogComplex::rotated(double theta) const {
  if (is_zero()) return *this;
  return {log_mag_, phase_ + theta};
}

LogComplex LogComplex::scaled_log(double dlog) const {
  if (is_zero()) return *this;
  return {log_mag_ + dlog, phase_};
}

double relative_difference(const LogComplex& a, const LogComplex& b) {
  if (a.is_zero() && b.is_zero()) return 0.0;
  double m = std::max(a.log_mag(), b.log_mag());
  cplx za = a.is_zero() ? cplx(0, 0) : std::polar(std::exp(a.log_mag() - m), a.arg());
  cplx zb = b.is_zero() ? cplx(0, 0) : std::polar(std::exp(b.log_mag() - m), b.arg());
  return std::abs(za - zb);
}

double sin_pi_ratio(long long num, long long den) {
  // Reduce num/den into [0, 2) exactly, then fold into [0, 1/2].
  long long period = 2 * den;
  long long k = num % period;
  if (k < 0) k += period;
  double sign = 1.0;
  if (k >= den) {
    k -= den;
    sign = -1.0;
  }
  if (2 * k > den) k = den - k;
  return sign * std::sin(kPi * static_cast<double>(k) / static_cast<double>(den));
}

RootContext::RootContext(int r, Precision precision) : r_(r), precision_(precision) {
  if (r < 3 || r % 2 == 0) {
    throw DomainError("RootContext: level r must be odd and >= 3, got " + std::to_string(r));
  }
  q_ = std::polar(1.0, kTwoPi / r);
  mu_r_ = 2.0 * std::sin(kTwoPi / r) / std::sqrt(static_cast<double>(r));

  // Tables run to r-1: the 6j sum needs [k+1]! with k <= r-2.
  const auto n_max = static_cast<std::size_t>(r - 1);
  log_qfact_.assign(n_max + 1, DoubleDouble(0.0));
  qfact_parity_.assign(n_max + 1, 0);
  log_bfact_.assign(n_max + 1, 0.0);
  const double s1 = std::sin(kTwoPi / r);
  double bsum = 0.0, bcomp = 0.0;
  for (std::size_t k = 1; k <= n_max; ++k) {
    double qk = sin_pi_ratio(2 * static_cast<long long>(k), r) / s1;
    log_qfact_[k] = log_qfact_[k - 1];
    log_qfact_[k] += DoubleDouble(std::log(std::abs(qk)));
    qfact_parity_[k] = qfact_parity_[k - 1] ^ (qk < 0 ? 1 : 0);
    neumaier_add(bsum, bcomp, std::log(2.0 * sin_pi_ratio(static_cast<long long>(k), r)));
    log_bfact_[k] = bsum + bcomp;
  }
}

LogComplex RootContext::q_power(double x) const {
  return {0.0, kTwoPi * x / r_};
}

double quantum_integer(const RootContext& ctx, long long n) {
  return sin_pi_ratio(2 * n, ctx.r()) / sin_pi_ratio(2, ctx.r());
}

LogComplex quantum_factorial(const RootContext& ctx, int n) {
  check_factorial_range(ctx, n, "quantum_factorial");
  return {ctx.log_abs_qfact(n), ctx.qfact_parity(n) ? kPi : 0.0};
}

cplx braced(const RootContext& ctx, long long n) {
  return {0.0, 2.0 * sin_pi_ratio(n, ctx.r())};
}

LogComplex braced_factorial(const RootContext& ctx, int n) {
  check_factorial_range(ctx, n, "braced_factorial");
  // Every factor 2i sin(pi k/r) with 1 <= k <= r-2 has positive sine.
  return {ctx.log_abs_bfact(n), 0.5 * kPi * n};
}

cplx qdiff(const RootContext& ctx, long long n) {
  return {0.0, 2.0 * sin_pi_ratio(2 * n, ctx.r())};
}

LogComplex qdiff_factorial(const RootContext& ctx, int n) {
  check_factorial_range(ctx, n, "qdiff_factorial");
  // Equals [n]! (q - q^{-1})^n; q - q^{-1} = 2i sin(2 pi/r).
  const double s1 = 2.0 * std::sin(kTwoPi / ctx.r());
  return {ctx.log_abs_qfact(n) + n * std::log(s1),
          (ctx.qfact_parity(n) ? kPi : 0.0) + 0.5 * kPi * n};
}

LogComplex log_sum(std::span<const LogComplex> terms, Precision precision) {
  double m = kNegInf;
  for (const auto& t : terms) m = std::max(m, t.log_mag());
  if (m == kNegInf) return LogComplex::zero();

  double re = 0.0, im = 0.0, re_c = 0.0, im_c = 0.0;
  DoubleDouble re_dd, im_dd;
  for (const auto& t : terms) {
    if (t.is_zero()) continue;
    double w = std::exp(t.log_mag() - m);
    double ph = t.arg();
    double x = w * std::cos(ph), y = w * std::sin(ph);
    if (precision == Precision::extended) {
      re_dd += DoubleDouble(x);
      im_dd += DoubleDouble(y);
    } else {
      neumaier_add(re, re_c, x);
      neumaier_add(im, im_c, y);
    }
  }
  cplx s = precision == Precision::extended ? cplx(re_dd.value(), im_dd.value())
                                            : cplx(re + re_c, im + im_c);
  return LogComplex::from_complex(s).scaled_log(m);
}

LogComplex tree_reduce(std::vector<LogComplex> partials, Precision precision) {
  if (partials.empty()) return LogComplex::zero();
  while (partials.size() > 1) {
    std::vector<LogComplex> next;
    next.reserve((partials.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < partials.size(); i += 2) {
      LogComplex pair[2] = {partials[i], partials[i + 1]};
      next.push_back(log_sum(pair, precision));
    }
    if (partials.size() % 2 == 1) next.push_back(partials.back());
    partials.swap(next);
  }
  return partials.front();
}

void LogAccumulator::rescale(double new_scale) {
  if (scale_ != kNegInf) {
    double f = std::exp(scale_ - new_scale);
    re_ = DoubleDouble(re_.hi * f, re_.lo * f);
    im_ = DoubleDouble(im_.hi * f, im_.lo * f);
    re_c_ *= f;
    im_c_ *= f;
  }
  scale_ = new_scale;
}

void LogAccumulator::add(const LogComplex& t) {
  if (t.is_zero()) return;
  if (t.log_mag() > scale_) rescale(t.log_mag());
  double w = std::exp(t.log_mag() - scale_);
  double ph = t.arg();
  double x = w * std::cos(ph), y = w * std::sin(ph);
  if (precision_ == Precision::extended) {
    re_ += DoubleDouble(x);
    im_ += DoubleDouble(y);
  } else {
    neumaier_add(re_.hi, re_c_, x);
    neumaier_add(im_.hi, im_c_, y);
  }
}

LogComplex LogAccumulator::result() const {
  if (scale_ == kNegInf) return LogComplex::zero();
  cplx s = precision_ == Precision::extended
               ? cplx(re_.value(), im_.value())
               : cplx(re_.hi + re_c_, im_.hi + im_c_);
  return LogComplex::from_complex(s).scaled_log(scale_);
}

}  // namespace shadowrt
