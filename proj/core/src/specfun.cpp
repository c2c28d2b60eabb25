#include "shadowrt/specfun.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <string>

#include "shadowrt/errors.hpp"

namespace shadowrt {

namespace {

constexpr double kPi2Over6 = kPi * kPi / 6.0;
constexpr int kSeriesTerms = 64;

// zeta(2k) for k = 1..kSeriesTerms.
std::array<double, kSeriesTerms + 1> make_zeta_even() {
  std::array<double, kSeriesTerms + 1> z{};
  const double p2 = kPi * kPi;
  z[1] = p2 / 6.0;
  z[2] = p2 * p2 / 90.0;
  z[3] = p2 * p2 * p2 / 945.0;
  z[4] = p2 * p2 * p2 * p2 / 9450.0;
  for (int k = 5; k <= kSeriesTerms; ++k) {
    double s = 0.0;
    for (int n = 60; n >= 1; --n) s += std::pow(static_cast<double>(n), -2.0 * k);
    z[static_cast<std::size_t>(k)] = s;
  }
  return z;
}

const std::array<double, kSeriesTerms + 1>& zeta_even() {
  static const auto table = make_zeta_even();
  return table;
}

// Coefficient of u^{2k+1} in Li2 = sum B_n u^{n+1}/(n+1)!, u = -log(1-z):
// B_{2k}/(2k+1)! = (-1)^{k+1} 2 zeta(2k) / ((2 pi)^{2k} (2k+1)).
cplx li2_bernoulli(cplx u) {
  const auto& zeta = zeta_even();
  cplx u2 = u * u;
  cplx sum = u - 0.25 * u2;
  cplx upow = u;
  double inv2pi2 = 1.0 / (kTwoPi * kTwoPi);
  double scale = 1.0;
  for (int k = 1; k <= kSeriesTerms; ++k) {
    upow *= u2;
    scale *= inv2pi2;
    double c = 2.0 * zeta[static_cast<std::size_t>(k)] * scale / (2.0 * k + 1.0);
    cplx term = (k % 2 == 1 ? c : -c) * upow;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

cplx li2_taylor(cplx z) {
  cplx sum = 0.0, zk = z;
  for (int k = 1; k < 200; ++k) {
    cplx term = zk / static_cast<double>(k * k);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    zk *= z;
  }
  return sum;
}

cplx li2_core(cplx z) {
  const double az = std::abs(z);
  if (az <= 0.5) return li2_taylor(z);
  if (az >= 2.0) {
    cplx lmz = std::log(-z);
    return -li2_core(1.0 / z) - kPi2Over6 - 0.5 * lmz * lmz;
  }
  cplx w = 1.0 - z;
  if (std::abs(w) < 0.5) {
    if (w == cplx(0.0, 0.0)) return kPi2Over6;
    return kPi2Over6 - std::log(z) * std::log(w) - li2_core(w);
  }
  return li2_bernoulli(-std::log(w));
}

// Integrand pieces of phi_r. w = 2z - pi.
struct PhiIntegrand {
  cplx w;
  double r;

  cplx semicircle(cplx x) const {
    return std::exp(w * x) / (4.0 * x * std::sinh(kPi * x) * std::sinh(kTwoPi * x / r));
  }

  // f(x) + f(-x) for x > 0, written to avoid overflow.
  cplx ray(double x) const {
    double decay = kPi + kTwoPi / r;
    double d = -std::expm1(-kTwoPi * x) * -std::expm1(-2.0 * kTwoPi * x / r);
    cplx num = std::exp((w - decay) * x) - std::exp((-w - decay) * x);
    return num / (x * d);
  }
};

cplx integrate_contour(const PhiIntegrand& f, double eps, double trunc, int n) {
  const auto& gl = gauss_legendre(n);
  cplx total = 0.0;

  // Upper half circle, traversed from -eps to eps.
  {
    cplx s = 0.0;
    const double half = 0.5 * kPi;
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      double th = half * (gl.nodes[k] + 1.0);
      cplx x = std::polar(eps, th);
      s += gl.weights[k] * f.semicircle(x) * cplx(0.0, 1.0) * x;
    }
    total -= half * s;
  }

  // Rays folded onto [eps, trunc]; panels stay short because 1/sinh(pi x)
  // has poles at distance 1 from every real point.
  double a = eps;
  while (a < trunc) {
    double b = a < 1.0 ? 1.0 : (a < 2.0 ? 2.0 : a + 3.0);
    if (b > trunc) b = trunc;
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    cplx s = 0.0;
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      s += gl.weights[k] * f.ray(mid + half * gl.nodes[k]);
    }
    total += half * s;
    a = b;
  }
  return total;
}

// Direct evaluation for 0 <= Re z <= pi.
cplx phi_strip(const RootContext& ctx, const ContourSpec& contour, cplx z) {
  const double r = ctx.r();
  PhiIntegrand f{2.0 * z - kPi, r};
  double trunc = contour.truncation;
  if (trunc <= 0.0) {
    double kappa = kPi + kTwoPi / r - std::abs(f.w.real());
    trunc = std::max(20.0, (40.0 + std::log(r)) / kappa);
  }
  const cplx pref(0.0, 4.0 * kPi / r);
  int n = contour.nodes;
  cplx prev = pref * integrate_contour(f, contour.epsilon, trunc, n);
  while (n < 1024) {
    n *= 2;
    cplx next = pref * integrate_contour(f, contour.epsilon, trunc, n);
    if (std::abs(next - prev) < 1e-10 * std::max(1.0, std::abs(next))) return next;
    prev = next;
  }
  return prev;
}

}  // namespace

void ContourSpec::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("ContourSpec: epsilon must lie in (0,1)");
  if (truncation != 0.0 && truncation < 20.0) throw DomainError("ContourSpec: truncation must be >= 20");
  if (nodes < 64) throw DomainError("ContourSpec: nodes must be >= 64");
}

const GaussLegendreRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussLegendreRule>> rules;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = rules[n];
  if (slot) return *slot;
  auto rule = std::make_unique<GaussLegendreRule>();
  rule->nodes.resize(static_cast<std::size_t>(n));
  rule->weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double wgt = 2.0 / ((1.0 - x * x) * dp * dp);
    auto lo = static_cast<std::size_t>(i), hi = static_cast<std::size_t>(n - 1 - i);
    rule->nodes[lo] = -x;
    rule->nodes[hi] = x;
    rule->weights[lo] = wgt;
    rule->weights[hi] = wgt;
  }
  slot = std::move(rule);
  return *slot;
}

cplx li2(cplx z) {
  if (z.imag() == 0.0 && z.real() > 1.0 && !std::signbit(z.imag())) {
    throw DomainError("li2: argument " + std::to_string(z.real()) +
                      " lies on the branch cut (1, inf)");
  }
  if (z == cplx(0.0, 0.0)) return 0.0;
  if (z == cplx(1.0, 0.0)) return kPi2Over6;
  return li2_core(z);
}

double clausen2(double x) {
  x = std::remainder(x, kTwoPi);
  if (x == 0.0 || std::abs(x) == kPi) return 0.0;
  const auto& zeta = zeta_even();
  double x2 = x * x;
  double sum = x - x * std::log(std::abs(x));
  double xp = x;
  double scale = 1.0;
  for (int k = 1; k <= kSeriesTerms; ++k) {
    xp *= x2;
    scale /= kTwoPi * kTwoPi;
    // |B_2k| / (2k)! = 2 zeta(2k) / (2 pi)^{2k}
    double term = 2.0 * zeta[static_cast<std::size_t>(k)] * scale * xp / (2.0 * k * (2.0 * k + 1.0));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

double lobachevsky(double theta) { return 0.5 * clausen2(2.0 * theta); }

bool phi_r_near_pole(const RootContext& ctx, cplx z, double tol) {
  if (std::abs(z.imag()) >= tol) return false;
  const long long r = ctx.r();
  const double t = z.real() * static_cast<double>(r) / kPi;
  for (long long j : {static_cast<long long>(std::floor(t)), static_cast<long long>(std::ceil(t))}) {
    double dist = std::hypot(z.real() - static_cast<double>(j) * kPi / static_cast<double>(r), z.imag());
    if (dist >= tol) continue;
    if (j > 0) {
      // (a+1)pi + b pi/r: even j in (r, 2r], every j > 2r.
      if ((j > r && j <= 2 * r && j % 2 == 0) || j > 2 * r) return true;
    } else if (j < 0) {
      // -a pi - b pi/r: odd |j|, every |j| > r.
      long long m = -j;
      if (m % 2 == 1 || m > r) return true;
    }
  }
  return false;
}

cplx phi_r(const RootContext& ctx, const ContourSpec& contour, cplx z) {
  contour.validate();
  if (phi_r_near_pole(ctx, z)) {
    throw PoleProximityError("phi_r: argument (" + std::to_string(z.real()) + ", " +
                             std::to_string(z.imag()) + ") is within 1e-6 of a pole");
  }
  const double r = ctx.r();
  const double step = kTwoPi / r;
  const cplx i4pi_r(0.0, 4.0 * kPi / r);
  const cplx two_i(0.0, 2.0);

  if (z.real() > kPi) {
    // phi(z) = phi(z - 2n pi/r) - (4 pi i/r) sum_k log(1 - e^{2i(z - (2k-1)pi/r)})
    auto n = static_cast<int>(std::ceil((z.real() - kPi) / step));
    cplx corr = 0.0;
    for (int k = 1; k <= n; ++k) {
      corr += std::log(1.0 - std::exp(two_i * (z - (2.0 * k - 1.0) * kPi / r)));
    }
    return phi_strip(ctx, contour, z - n * step) - i4pi_r * corr;
  }
  if (z.real() < 0.0) {
    auto n = static_cast<int>(std::ceil(-z.real() / step));
    cplx w = z + n * step;
    cplx corr = 0.0;
    for (int k = 1; k <= n; ++k) {
      corr += std::log(1.0 - std::exp(two_i * (w - (2.0 * k - 1.0) * kPi / r)));
    }
    return phi_strip(ctx, contour, w) + i4pi_r * corr;
  }
  return phi_strip(ctx, contour, z);
}

PhiGrid::PhiGrid(const RootContext& ctx, ContourSpec contour)
    : ctx_(ctx), contour_(contour) {
  contour_.validate();
}

cplx PhiGrid::at(int j) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(j);
    if (it != cache_.end()) return it->second;
  }
  cplx v = phi_r(ctx_, contour_, cplx(j * kPi / ctx_.r(), 0.0));
  std::lock_guard<std::mutex> lock(mu_);
  cache_.emplace(j, v);
  return v;
}

}  // namespace shadowrt
