#include <numeric>
#include <vector>

#include "doctest.h"
#include "shadowrt/errors.hpp"
#include "shadowrt/filling.hpp"
#include "test_util.hpp"

using namespace shadowrt;
using test_util::naive_sixj;
using test_util::rel;

namespace {

FslPresentation single_block() {
  FslPresentation p;
  p.c = 1;
  p.n = 6;
  p.incidence = {{1, 2, 3, 4, 5, 6}};
  p.iota = {1, 0, 0, 1, 0, 0};
  p.framing = {1, 0, -1, 0, 0, 2};
  return p;
}

bool naive_admissible(int r, const std::array<int, 6>& m) {
  auto tri = [r](int a, int b, int c) {
    return a + b >= c && b + c >= a && c + a >= b && a + b + c <= 2 * (r - 2);
  };
  return tri(m[0], m[1], m[2]) && tri(m[0], m[4], m[5]) && tri(m[1], m[3], m[5]) && tri(m[2], m[3], m[4]);
}

std::complex<double> qpow(int r, double e) { return std::polar(1.0, kTwoPi * e / r); }
std::complex<double> qd(int r, int n) { return qpow(r, n) - qpow(r, -n); }

// Direct transcription of the filled sum for component 1 of single_block(),
// with the chain (a_1, ..., a_z) summed by nested loops.
std::complex<double> naive_filled(int r, const std::vector<int>& a, int n_color, const std::array<int, 5>& mJ) {
  auto p = single_block();
  const int z = static_cast<int>(a.size());
  const double mu = 2.0 * std::sin(kTwoPi / r) / std::sqrt(static_cast<double>(r));
  std::complex<double> pre = std::pow(mu, z - 1) / std::pow(qd(r, 1), z);
  pre *= qpow(r, p.framing[0] * n_color * (n_color + 2) / 2.0);
  for (int j = 0; j < 5; ++j) {
    int m = mJ[static_cast<std::size_t>(j)];
    int io = p.iota[static_cast<std::size_t>(j + 1)];
    pre *= ((io * m / 2) % 2 ? -1.0 : 1.0) * qpow(r, (p.framing[static_cast<std::size_t>(j + 1)] + io / 2.0) * m * (m + 2) / 2.0);
  }
  std::complex<double> total = 0.0;
  std::vector<int> ms(static_cast<std::size_t>(z), 0);
  while (true) {
    std::complex<double> term = 1.0;
    int prev = n_color;
    for (int l = 0; l < z; ++l) {
      int m = ms[static_cast<std::size_t>(l)];
      term *= qd(r, (prev + 1) * (m + 1));
      prev = m;
      double frame = a[static_cast<std::size_t>(l)];
      if (l == z - 1) {
        frame += p.iota[0] / 2.0;
        if ((p.iota[0] * m / 2) % 2) term = -term;
      }
      term *= qpow(r, frame * m * (m + 2) / 2.0);
    }
    std::array<int, 6> six = {ms.back(), mJ[0], mJ[1], mJ[2], mJ[3], mJ[4]};
    if (naive_admissible(r, six)) total += term * naive_sixj(r, six);
    int l = 0;
    while (l < z && ms[static_cast<std::size_t>(l)] == r - 3) ms[static_cast<std::size_t>(l++)] = 0;
    if (l == z) break;
    ms[static_cast<std::size_t>(l)] += 2;
  }
  return pre * total;
}

}  // namespace

TEST_CASE("negative continued fractions") {
  CHECK(neg_cf(5, 3) == std::vector<std::int64_t>{3, 2});
  CHECK(neg_cf(2, 1) == std::vector<std::int64_t>{2});
  CHECK(neg_cf(-5, 3) == std::vector<std::int64_t>{-3, -2});
  CHECK(neg_cf(7, 2) == std::vector<std::int64_t>{2, 4});
  CHECK_THROWS_AS(neg_cf(1, 3), UnsupportedSlope);
  CHECK_THROWS_AS(neg_cf(1, 1), UnsupportedSlope);
  CHECK_THROWS_AS(neg_cf(6, 4), DomainError);
  CHECK_THROWS_AS(neg_cf(5, 0), DomainError);

  for (std::int64_t p = -60; p <= 60; ++p) {
    for (std::int64_t q = 1; q < std::abs(p); ++q) {
      if (std::gcd(p, q) != 1) continue;
      auto a = neg_cf(p, q);
      for (auto x : a) CHECK(std::abs(x) >= 2);
      CHECK(evaluate_neg_cf(a) == RationalValue{p, q});
      auto top = cf_partials(a).c[a.size() - 1];
      CHECK(top.den == 1);
      CHECK(std::abs(top.num) == q);
    }
  }
}

TEST_CASE("dual slopes") {
  CHECK(dual_slope(5, 3).p_prime == -1);
  CHECK(dual_slope(5, 3).q_prime == 2);
  CHECK(dual_slope(1, 1).p_prime == 0);
  CHECK(dual_slope(1, 1).q_prime == 1);
  CHECK(dual_slope(7, 5).p_prime == -2);
  CHECK(dual_slope(7, 5).q_prime == 3);
  CHECK(dual_slope(-5, 3).p_prime == 1);
  CHECK_THROWS_AS(dual_slope(4, 2), DomainError);
}

TEST_CASE("reciprocal sum of partial products equals -p'/q") {
  CHECK(cf_reciprocal_sum(cf_partials(neg_cf(5, 3))) == RationalValue{1, 3});
  for (std::int64_t p = -50; p <= 50; ++p) {
    for (std::int64_t q = 1; q < std::abs(p); ++q) {
      if (std::gcd(p, q) != 1) continue;
      auto d = dual_slope(p, q);
      CHECK(p * d.p_prime + q * d.q_prime == 1);
      auto sum = cf_reciprocal_sum(cf_partials(neg_cf(p, q)));
      auto g = std::gcd(d.p_prime, q);
      if (g == 0) g = 1;
      RationalValue expect{-d.p_prime / g, q / g};
      if (expect.num == 0) expect.den = 1;
      CHECK(sum == expect);
    }
  }
}

TEST_CASE("surgery presentation") {
  auto p = single_block();
  auto s = make_surgery(p, {1, 4}, {{5, 3}, {-7, 2}});
  CHECK(s.filled.size() == 2);
  CHECK(s.zeta_total() == 2 + static_cast<int>(neg_cf(-7, 2).size()));
  CHECK(s.is_filled(0));
  CHECK(s.is_filled(3));
  CHECK_FALSE(s.is_filled(1));
  CHECK(s.filled_index(3) == 1);
  CHECK(unfilled_components(p, s) == std::vector<int>{1, 2, 4, 5});
  CHECK_THROWS_AS(make_surgery(p, {1}, {{1, 3}}), UnsupportedSlope);
  CHECK_THROWS_AS(make_surgery(p, {7}, {{5, 3}}), DomainError);
  CHECK_THROWS_AS(make_surgery(p, {1, 1}, {{5, 3}, {5, 3}}), DomainError);
  CHECK_THROWS_AS(make_surgery(p, {1}, {{6, 3}}), DomainError);
}

TEST_CASE("empty filling reduces to the unfilled invariant") {
  auto p = single_block();
  auto s = make_surgery(p, {}, {});
  for (int r : {7, 11}) {
    RootContext ctx(r);
    std::vector<int> m = {2, 4, 4, 2, 4, 4};
    auto v = rt_filled(ctx, p, s, {}, m).value;
    auto w = rt_fsl(ctx, p, Coloring{m});
    CHECK(v.log_mag() == w.log_mag());
    CHECK(v.arg() == w.arg());
  }
}

TEST_CASE("filled sum matches the naive oracle") {
  auto p = single_block();
  struct Case {
    int r;
    std::int64_t sp, sq;
    int n_color;
    std::array<int, 5> mJ;
  };
  const Case cases[] = {{5, 2, 1, 0, {0, 0, 0, 0, 0}},
                        {5, 2, 1, 2, {2, 2, 2, 2, 2}},
                        {5, 2, 1, 2, {0, 2, 2, 0, 2}},
                        {7, 5, 3, 2, {2, 4, 2, 4, 2}},
                        {9, -7, 3, 4, {2, 4, 6, 2, 4}}};
  for (const auto& c : cases) {
    RootContext ctx(c.r);
    auto s = make_surgery(p, {1}, {{c.sp, c.sq}});
    std::vector<int> a;
    for (auto x : s.filled[0].cf) a.push_back(static_cast<int>(x));
    std::vector<int> mJ(c.mJ.begin(), c.mJ.end());
    auto v = rt_filled(ctx, p, s, {c.n_color}, mJ).value.value();
    auto w = naive_filled(c.r, a, c.n_color, c.mJ);
    CHECK(rel(v, w) < 1e-9);
  }
}

TEST_CASE("signature only changes the phase") {
  auto p = single_block();
  auto s = make_surgery(p, {1}, {{5, 3}});
  RootContext ctx(11);
  std::vector<int> mJ = {2, 4, 2, 4, 2};
  auto base = rt_filled(ctx, p, s, {2}, mJ).value;
  for (int sigma : {-2, 1, 3}) {
    auto p2 = p;
    p2.signature_hint = sigma;
    auto v = rt_filled(ctx, p2, s, {2}, mJ).value;
    CHECK(v.log_mag() == doctest::Approx(base.log_mag()).epsilon(1e-15));
    auto expect = base * signature_phase(11, sigma);
    CHECK(relative_difference(v, expect) < 1e-13);
  }
  // sigma -> sigma + 1 multiplies by exp(-(-3/r - (r+1)/4) i pi).
  double ph = kPi * (3.0 / 11.0 + 12.0 / 4.0);
  CHECK(std::abs(std::remainder(signature_phase(11, 1).arg() - ph, kTwoPi)) < 1e-14);
}

TEST_CASE("thread count does not change the bits") {
  FslPresentation p;
  p.c = 2;
  p.n = 9;
  p.incidence = {{1, 2, 3, 4, 5, 6}, {1, 2, 7, 8, 5, 9}};
  p.iota.assign(9, 0);
  p.framing.assign(9, 0);
  auto s = make_surgery(p, {1, 2}, {{5, 3}, {3, 1}});
  RootContext ctx(15);
  std::vector<int> mJ = {4, 6, 4, 6, 4, 6, 4};
  FilledOptions one, many;
  many.threads = 4;
  auto a = rt_filled(ctx, p, s, {2, 4}, mJ, one).value;
  auto b = rt_filled(ctx, p, s, {2, 4}, mJ, many).value;
  CHECK(a.log_mag() == b.log_mag());
  CHECK(a.arg() == b.arg());
  CHECK_FALSE(a.is_zero());

  // Swapping the two blocks and the order of the filled components agrees to rounding.
  auto p2 = p;
  std::swap(p2.incidence[0], p2.incidence[1]);
  auto s2 = make_surgery(p2, {2, 1}, {{3, 1}, {5, 3}});
  auto c = rt_filled(ctx, p2, s2, {4, 2}, mJ).value;
  CHECK(relative_difference(a, c) < 1e-12);
}

TEST_CASE("even denominators are flagged") {
  auto p = single_block();
  auto s = make_surgery(p, {1}, {{5, 2}});
  RootContext ctx(7);
  auto res = rt_filled(ctx, p, s, {0}, {0, 0, 0, 0, 0});
  REQUIRE(res.warnings.size() == 1);
  CHECK(res.warnings[0].code == "EvenDenominator");
  CHECK(rt_filled(ctx, p, make_surgery(p, {1}, {{5, 3}}), {0}, {0, 0, 0, 0, 0}).warnings.empty());
  CHECK_THROWS_AS(rt_filled(ctx, p, s, {1}, {0, 0, 0, 0, 0}), DomainError);
}
