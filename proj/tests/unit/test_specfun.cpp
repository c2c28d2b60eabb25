#include <vector>

#include "doctest.h"
#include "shadowrt/errors.hpp"
#include "shadowrt/specfun.hpp"
#include "test_util.hpp"

using namespace shadowrt;
using test_util::qexp;
using test_util::rel;

namespace {

const cplx I(0.0, 1.0);

// Independent Lobachevsky oracle: composite Gauss-Legendre on -log|2 sin t|,
// with the logarithmic endpoint singularity removed analytically.
double lobachevsky_quadrature(double theta) {
  // -int_0^theta log|2 sin t| dt = -theta log 2 - int_0^theta log(sin t / t) dt - (theta log theta - theta)
  const auto& rule = gauss_legendre(64);
  const int panels = 64;
  double h = theta / panels, acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    double a = p * h;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      double t = a + 0.5 * h * (rule.nodes[k] + 1.0);
      acc += 0.5 * h * rule.weights[k] * std::log(std::sin(t) / t);
    }
  }
  return -theta * std::log(2.0) - acc - (theta * std::log(theta) - theta);
}

}  // namespace

TEST_CASE("dilogarithm frozen values") {
  CHECK(rel(li2(1.0), kPi * kPi / 6.0) < 1e-15);
  CHECK(li2(0.0) == cplx(0.0, 0.0));
  CHECK(rel(li2(-1.0), -kPi * kPi / 12.0) < 1e-14);
  CHECK(rel(li2(cplx(0.3, 0.4)), cplx(0.26659686674274042, 0.46136289181910899)) < 1e-13);
  CHECK(rel(li2(cplx(2.0, 1.0)), cplx(1.1866885370000578, 2.4077407693457720)) < 1e-13);
  CHECK_THROWS_AS(li2(cplx(2.0, 0.0)), DomainError);
  // The lower side of the cut is accepted.
  CHECK(std::isfinite(li2(cplx(2.0, -0.0)).real()));
}

TEST_CASE("dilogarithm on the unit circle matches the Lobachevsky form") {
  for (int k = 1; k < 40; ++k) {
    double th = kPi * k / 40.0;
    cplx lhs = li2(std::exp(2.0 * I * th));
    cplx rhs = kPi * kPi / 6.0 + th * (th - kPi) + 2.0 * I * lobachevsky(th);
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("dilogarithm inversion") {
  for (double rad : {1.05, 1.5, 3.0, 10.0}) {
    for (int k = 0; k < 12; ++k) {
      double ang = 0.1 + kTwoPi * k / 12.0;
      cplx z = std::polar(rad, ang);
      if (std::abs(z.imag()) < 1e-3) continue;
      cplx lmz = std::log(-z);
      cplx resid = li2(1.0 / z) + li2(z) + kPi * kPi / 6.0 + 0.5 * lmz * lmz;
      CHECK(std::abs(resid) < 1e-10);
    }
  }
}

TEST_CASE("Lobachevsky function") {
  CHECK(lobachevsky(0.0) == 0.0);
  CHECK(std::abs(lobachevsky(kPi / 2.0)) < 1e-15);
  CHECK(lobachevsky(kPi / 4.0) == doctest::Approx(0.45798279708860951).epsilon(1e-14));
  CHECK(8.0 * lobachevsky(kPi / 4.0) == doctest::Approx(kOctahedronVolume).epsilon(1e-14));
  CHECK(lobachevsky(1.0) == doctest::Approx(0.36357302543163962).epsilon(1e-14));
  for (double th : {0.05, 0.3, 1.0, 1.4, 2.5, 3.1}) {
    CHECK(std::abs(lobachevsky(th + kPi) - lobachevsky(th)) < 1e-12);
    CHECK(std::abs(lobachevsky(-th) + lobachevsky(th)) < 1e-12);
    if (th < kPi) CHECK(std::abs(lobachevsky(th) - lobachevsky_quadrature(th)) < 1e-10);
  }
}

TEST_CASE("contour validation") {
  ContourSpec c;
  CHECK_NOTHROW(c.validate());
  c.epsilon = 1.2;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = ContourSpec{};
  c.nodes = 16;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = ContourSpec{};
  c.truncation = 5.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("quantum dilogarithm functional equations") {
  ContourSpec contour;
  for (int r : {5, 31, 101}) {
    RootContext ctx(r);
    const double h = kPi / r;
    // Twenty points of the strip 0 < Re z < pi for the first relation.
    for (int k = 0; k < 20; ++k) {
      cplx z(0.1 + 2.9 * k / 19.0, -0.2 + 0.4 * ((k * 7) % 20) / 19.0);
      if (phi_r_near_pole(ctx, z - h, 1e-3) || phi_r_near_pole(ctx, z + h, 1e-3)) continue;
      cplx lhs = 1.0 - std::exp(2.0 * I * z);
      cplx rhs = qexp(r, phi_r(ctx, contour, z - h) - phi_r(ctx, contour, z + h));
      CHECK(std::abs(lhs - rhs) < 1e-8);
    }
    // And twenty points of -pi/r < Re z < pi/r for the second.
    for (int k = 0; k < 20; ++k) {
      cplx z(h * (-0.9 + 1.8 * k / 19.0), -0.1 + 0.2 * ((k * 3) % 20) / 19.0);
      cplx lhs = 1.0 + std::exp(static_cast<double>(r) * I * z);
      cplx rhs = qexp(r, phi_r(ctx, contour, z) - phi_r(ctx, contour, z + kPi));
      CHECK(std::abs(lhs - rhs) < 1e-8);
    }
  }
  RootContext c7(7);
  cplx z(0.3, 0.1);
  cplx lhs = 1.0 - std::exp(2.0 * I * z);
  cplx rhs = qexp(7, phi_r(c7, contour, z - kPi / 7) - phi_r(c7, contour, z + kPi / 7));
  CHECK(std::abs(lhs - rhs) < 1e-8);
}

TEST_CASE("q-Pochhammer from the quantum dilogarithm") {
  ContourSpec contour;
  for (int r : {7, 101}) {
    RootContext ctx(r);
    const cplx phi0 = phi_r(ctx, contour, kPi / r);
    cplx direct = 1.0;
    for (int n = 0; n <= r - 2; ++n) {
      if (n > 0) direct *= 1.0 - std::pow(ctx.q(), 2 * n);
      cplx closed_form = qexp(r, phi0 - phi_r(ctx, contour, kTwoPi * n / r + kPi / r));
      CHECK(rel(closed_form, direct) < 1e-8);
      if (2 * n >= r - 1) {
        cplx moved = 2.0 * qexp(r, phi0 - phi_r(ctx, contour, kTwoPi * n / r + kPi / r - kPi));
        CHECK(rel(moved, direct) < 1e-8);
      }
    }
  }
}

TEST_CASE("quantum dilogarithm converges to the classical one") {
  ContourSpec contour;
  RootContext ctx(101);
  cplx phi = phi_r(ctx, contour, kPi / 2.0);
  CHECK(std::abs(phi - li2(-1.0)) * 101.0 * 101.0 <= 10.0);

  for (int r : {31, 101, 301}) {
    RootContext c(r);
    cplx val = phi_r(c, contour, kPi / r);
    cplx approx = kPi * kPi / 6.0 + kTwoPi * I / static_cast<double>(r) * std::log(r / 2.0) -
                  kPi * kPi / r;
    CHECK(std::abs(val - approx) < 50.0 / (static_cast<double>(r) * r));
  }
}

TEST_CASE("pole detection") {
  RootContext ctx(7);
  ContourSpec contour;
  CHECK(phi_r_near_pole(ctx, kPi + kPi / 7.0));
  CHECK(phi_r_near_pole(ctx, -kPi / 7.0));
  CHECK_FALSE(phi_r_near_pole(ctx, kPi / 2.0));
  CHECK_THROWS_AS(phi_r(ctx, contour, kPi + 3.0 * kPi / 7.0), PoleProximityError);
}

TEST_CASE("phi grid caches exact grid values") {
  RootContext ctx(31);
  PhiGrid grid(ctx);
  ContourSpec contour;
  for (int j : {1, 5, 17, 29}) {
    CHECK(rel(grid.at(j), phi_r(ctx, contour, j * kPi / 31.0)) < 1e-14);
    CHECK(grid.at(j) == grid.at(j));
  }
}
