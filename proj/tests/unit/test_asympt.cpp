#include <vector>

#include "doctest.h"
#include "shadowrt/asympt.hpp"
#include "shadowrt/errors.hpp"
#include "test_util.hpp"

using namespace shadowrt;

namespace {

FslPresentation single_block() {
  FslPresentation p;
  p.c = 1;
  p.n = 6;
  p.incidence = {{1, 2, 3, 4, 5, 6}};
  p.iota.assign(6, 0);
  p.framing.assign(6, 0);
  return p;
}

std::vector<std::pair<int, LogComplex>> synthetic(double vol, double cs, double power, cplx c0) {
  std::vector<std::pair<int, LogComplex>> pts;
  for (int r = 41; r <= 121; r += 2) {
    double x = r / (4.0 * kPi);
    pts.emplace_back(r, LogComplex(vol * x + power * std::log(r) + c0.real(), cs * x + c0.imag()));
  }
  return pts;
}

}  // namespace

TEST_CASE("growth fit recovers a synthetic sequence") {
  auto pts = synthetic(7.3, 1.2, 1.5, cplx(-0.4, 0.3));
  auto f = growth_fit(pts);
  CHECK(std::abs(f.vol - 7.3) < 1e-9);
  CHECK(std::abs(f.cs - 1.2) < 1e-9);
  CHECK(std::abs(f.power - 1.5) < 1e-9);
  CHECK(std::abs(f.constant.real() + 0.4) < 1e-8);
  CHECK(f.residual < 1e-9);

  std::vector<std::pair<int, LogComplex>> rev(pts.rbegin(), pts.rend());
  auto g = growth_fit(rev);
  CHECK(std::abs(g.vol - f.vol) < 1e-9);
  CHECK(std::abs(g.cs - f.cs) < 1e-9);

  pts.resize(2);
  CHECK_THROWS_AS(growth_fit(pts), DomainError);
}

TEST_CASE("phase unwrapping") {
  std::vector<LogComplex> v;
  for (int k = 0; k < 50; ++k) v.emplace_back(0.0, 0.9 * k);
  auto u = unwrap_phases(v);
  for (int k = 0; k < 50; ++k) CHECK(u[static_cast<std::size_t>(k)] == doctest::Approx(0.9 * k).epsilon(1e-12));
}

TEST_CASE("Aitken acceleration") {
  std::vector<double> x;
  for (int k = 0; k < 8; ++k) x.push_back(2.0 + 0.5 * std::pow(0.6, k));
  auto a = aitken(x);
  CHECK(a.size() == 6);
  for (double y : a) CHECK(std::abs(y - 2.0) < 1e-12);
  auto flat = aitken({1.0, 1.0, 1.0});
  CHECK(flat.size() == 1);
  CHECK(flat[0] == 1.0);
}

TEST_CASE("CS comparison modulo the period") {
  const double period = kPi * kPi / 2.0;
  CHECK(std::abs(cs_distance_mod(1.0 + period, 1.0)) < 1e-12);
  CHECK(std::abs(cs_distance_mod(1.0 - 3.0 * period, 1.0)) < 1e-12);
  CHECK(cs_distance_mod(1.1, 1.0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(std::abs(cs_distance_mod(0.0, period / 2.0 + 0.01)) <= period / 2.0);
}

TEST_CASE("color realization for cone angles") {
  CHECK(realize_color(51, 0.0, 1) == 26);
  CHECK(realize_color(53, 0.0, 1) == 26);
  // r alpha/(2 pi) = 3 exactly: 2 and 4 are equally close.
  CHECK(realize_color(7, kTwoPi / 7.0, -1) == 2);
  for (int r : {51, 101, 301}) {
    for (double th : {0.05, 0.1, 0.2}) {
      int m = realize_color(r, th, 1);
      double alpha = kTwoPi * m / r;
      CHECK(std::abs(alpha - (kPi + th / 2.0)) <= kTwoPi / r + 1e-12);
      CHECK(realize_color(r, th, -1) <= m);
    }
  }
}

TEST_CASE("trivial colorings have no exponential growth") {
  auto p = single_block();
  std::vector<std::pair<int, LogComplex>> pts;
  for (int r = 51; r <= 151; r += 2) {
    RootContext ctx(r);
    pts.emplace_back(r, rt_fsl(ctx, p, Coloring{std::vector<int>(6, 0)}));
  }
  auto f = growth_fit(pts);
  CHECK(std::abs(f.vol) < 0.02);
  // |RT| = sqrt(r) / (2 sin(2 pi / r)) ~ r^{3/2}.
  CHECK(f.power == doctest::Approx(1.5).epsilon(0.05));
}

TEST_CASE("predicted term depends on the torsion through its square root") {
  auto p = single_block();
  auto s = make_surgery(p, {1}, {{5, 3}});
  auto sol = find_critical_point(p, s, {1}, {kPi + 0.05}, std::vector<double>(5, kPi + 0.05));
  auto t = torsion(p, s, sol);
  RootContext ctx(101);
  auto base = predicted_leading(ctx, p, s, sol, t);
  auto t2 = t;
  t2.torsion *= 2.0;
  auto scaled = predicted_leading(ctx, p, s, sol, t2);
  CHECK(scaled.value.log_mag() - base.value.log_mag() == doctest::Approx(-0.5 * std::log(2.0)).epsilon(1e-12));
  CHECK(std::abs(base.exponent.real() - sol.vol) < 1e-12);
  // The exponential part grows like exp(r vol / (4 pi)).
  RootContext ctx2(201);
  auto later = predicted_leading(ctx2, p, s, sol, t);
  CHECK(later.value.log_mag() - base.value.log_mag() - later.prefactor.log_mag() + base.prefactor.log_mag() ==
        doctest::Approx(100.0 * sol.vol / (4.0 * kPi)).epsilon(1e-10));
}

TEST_CASE("verify on a short range") {
  auto p = single_block();
  auto s = make_surgery(p, {1}, {{5, 3}});
  AngleSpec angles;
  angles.theta.assign(6, 0.1);
  std::vector<int> rs;
  for (int r = 51; r <= 81; r += 2) rs.push_back(r);
  auto rep = verify(p, s, angles, rs);
  CHECK(rep.points.size() == rs.size());
  for (const auto& pt : rep.points) CHECK(pt.ok);
  CHECK(rep.warnings.empty());
  CHECK(std::abs(rep.fitted_vol - rep.predicted_vol) < 1.0);
  CHECK(rep.prefactor_ratio.size() == rs.size());

  auto csv = report_csv(rep);
  CHECK(csv.rfind("r,log_mag,phase,fitted_running_vol,predicted_vol,ratio_mag,ratio_phase\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(rs.size()) + 1);

  VerifyOptions threaded;
  threaded.threads = 3;
  CHECK(report_csv(verify(p, s, angles, rs, threaded)) == csv);
}

TEST_CASE("verify input checks and warnings") {
  auto p = single_block();
  auto s = make_surgery(p, {1}, {{5, 2}});
  AngleSpec angles;
  angles.theta.assign(6, 0.1);
  auto rep = verify(p, s, angles, {21, 23, 25});
  REQUIRE_FALSE(rep.warnings.empty());
  CHECK(rep.warnings[0].code == "EvenDenominator");
  CHECK_THROWS_AS(verify(p, s, angles, {21, 24, 25}), DomainError);
  CHECK_THROWS_AS(verify(p, s, angles, {25, 23, 27}), DomainError);
  angles.theta.pop_back();
  CHECK_THROWS_AS(verify(p, s, angles, {21, 23, 25}), DomainError);
}
