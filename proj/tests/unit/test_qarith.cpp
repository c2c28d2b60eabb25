#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "shadowrt/errors.hpp"
#include "shadowrt/qarith.hpp"
#include "shadowrt/specfun.hpp"
#include "test_util.hpp"

using namespace shadowrt;
using test_util::rel;

TEST_CASE("root context basics") {
  for (int r : {3, 5, 7, 101, 2001}) {
    RootContext ctx(r);
    CHECK(std::abs(std::abs(ctx.q()) - 1.0) < 1e-15);
    CHECK(std::abs(std::pow(ctx.q(), r) - cplx(1.0, 0.0)) < 1e-12);
    CHECK(ctx.mu_r() > 0.0);
    CHECK(ctx.mu_r() == doctest::Approx(2.0 * std::sin(kTwoPi / r) / std::sqrt(r)).epsilon(1e-15));
  }
  CHECK_THROWS_AS(RootContext(4), DomainError);
  CHECK_THROWS_AS(RootContext(1), DomainError);
}

TEST_CASE("quantum integers") {
  RootContext ctx(5);
  CHECK(quantum_integer(ctx, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(quantum_integer(ctx, 0) == 0.0);
  CHECK(quantum_integer(ctx, 2) == doctest::Approx(0.6180339887498949).epsilon(1e-13));
  for (int r : {5, 7, 31}) {
    RootContext c(r);
    for (int n = 0; n <= r; ++n) {
      CHECK(std::abs(quantum_integer(c, r - n) + quantum_integer(c, n)) < 1e-12);
    }
  }
}

TEST_CASE("quantum factorials") {
  RootContext c7(7);
  auto f0 = quantum_factorial(c7, 0);
  CHECK(f0.log_mag() == 0.0);
  CHECK(f0.arg() == 0.0);
  auto f5 = quantum_factorial(c7, 5);
  CHECK(std::abs(f5.arg()) < 1e-15);  // [4], [5] negative
  RootContext c5(5);
  CHECK(quantum_factorial(c5, 2).value().real() == doctest::Approx(0.6180339887498949).epsilon(1e-13));
  CHECK_THROWS_AS(quantum_factorial(c5, 4), DomainError);
  CHECK_THROWS_AS(quantum_factorial(c5, -1), DomainError);

  // Against the direct product for every admissible argument.
  for (int r : {7, 31, 101}) {
    RootContext c(r);
    double prod = 1.0;
    for (int n = 0; n <= r - 2; ++n) {
      if (n > 0) prod *= quantum_integer(c, n);
      auto f = quantum_factorial(c, n);
      CHECK(rel(f.value().real(), prod) < 1e-11);
      CHECK(std::abs(f.value().imag()) < 1e-9 * std::abs(prod));
    }
  }
}

TEST_CASE("braced values and factorials") {
  RootContext ctx(5);
  CHECK(std::abs(braced(ctx, 0)) == 0.0);
  CHECK(braced(ctx, 1).imag() == doctest::Approx(1.1755705045849463).epsilon(1e-13));
  CHECK(std::abs(braced(ctx, 1).real()) < 1e-16);
  CHECK(std::abs(braced(ctx, 5)) < 1e-15);

  RootContext c7(7);
  CHECK(braced_factorial(c7, 0).log_mag() == 0.0);
  cplx direct = 1.0;
  for (int k = 1; k <= 3; ++k) direct *= cplx(0.0, 2.0 * std::sin(kPi * k / 7.0));
  CHECK(rel(braced_factorial(c7, 3).value(), direct) < 1e-13);
  CHECK_THROWS_AS(braced_factorial(c7, 6), DomainError);
}

TEST_CASE("qdiff factorial matches the dilogarithm expression") {
  // {n}! = 2 exp((r/4 pi i)(-2 pi x + (2 pi/r)^2 (n^2+n) + phi(pi/r) - phi(x + pi/r - pi))), x = 2 pi n / r.
  RootContext ctx(101);
  ContourSpec contour;
  const cplx phi0 = phi_r(ctx, contour, kPi / 101.0);
  for (int n : {50, 60, 99}) {
    double x = kTwoPi * n / 101.0;
    double h = kTwoPi / 101.0;
    cplx expo = -kTwoPi * x + h * h * (n * n + n) + phi0 - phi_r(ctx, contour, x + kPi / 101.0 - kPi);
    cplx closed_form = 2.0 * test_util::qexp(101, expo);
    CHECK(rel(qdiff_factorial(ctx, n).value(), closed_form) < 1e-9);
  }
}

TEST_CASE("log-space representation") {
  auto z = LogComplex::zero();
  CHECK(z.is_zero());
  CHECK(z.arg() == 0.0);
  CHECK((z * LogComplex(3.0, 1.0)).is_zero());

  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 200; ++i) {
    cplx w(u(gen), u(gen));
    auto l = LogComplex::from_complex(w);
    CHECK(rel(l.value(), w) < 1e-13);
  }
  LogComplex big(500.0, 0.25);
  auto prod = big * big / big;
  CHECK(prod.log_mag() == doctest::Approx(500.0).epsilon(1e-15));
  CHECK(prod.arg() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(LogComplex(0.0, 7.0 * kPi).arg() == doctest::Approx(kPi).epsilon(1e-14));
}

TEST_CASE("log_sum") {
  std::vector<LogComplex> one{LogComplex::one(), LogComplex(0.0, kPi)};
  CHECK(std::abs(log_sum(one).value()) < 1e-15);
  std::vector<LogComplex> single{LogComplex(12.5, 0.3)};
  CHECK(rel(log_sum(single).value(), single[0].value()) < 1e-15);
  CHECK(log_sum(std::vector<LogComplex>{}).is_zero());

  std::vector<LogComplex> many(1000000, LogComplex(500.0, 0.0));
  auto s = log_sum(many);
  CHECK(s.log_mag() == doctest::Approx(500.0 + std::log(1e6)).epsilon(1e-14));
}

TEST_CASE("log_sum is permutation invariant") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> mag(0.0, 5.0), ph(-0.3, 0.3);
  std::vector<LogComplex> terms;
  for (int i = 0; i < 1000; ++i) terms.emplace_back(mag(gen), ph(gen));
  auto base = log_sum(terms);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(terms.begin(), terms.end(), gen);
    CHECK(relative_difference(log_sum(terms), base) < 1e-12);
    CHECK(relative_difference(log_sum(terms, Precision::extended), base) < 1e-12);
  }
}

TEST_CASE("tree_reduce has a fixed shape") {
  std::vector<LogComplex> parts;
  for (int i = 0; i < 37; ++i) parts.emplace_back(0.1 * i, 0.01 * i);
  auto a = tree_reduce(parts);
  auto b = tree_reduce(parts);
  CHECK(a.log_mag() == b.log_mag());
  CHECK(a.arg() == b.arg());
  CHECK(relative_difference(a, log_sum(parts)) < 1e-13);
}

TEST_CASE("streaming accumulator agrees with log_sum") {
  std::vector<LogComplex> terms;
  for (int i = 0; i < 300; ++i) terms.emplace_back(std::sin(i) * 40.0, 0.7 * i);
  LogAccumulator acc;
  for (const auto& t : terms) acc.add(t);
  CHECK(relative_difference(acc.result(), log_sum(terms)) < 1e-12);
}
