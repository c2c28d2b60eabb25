#include "shadowrt/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "shadowrt/errors.hpp"
#include "shadowrt/specfun.hpp"

namespace shadowrt {

namespace {

const cplx kI(0.0, 1.0);

// L(w) = Li2(e^{2iw}) and its first two derivatives in w.
cplx dilog_exp(cplx w) { return li2(std::exp(2.0 * kI * w)); }
cplx dilog_exp_d1(cplx w) { return -2.0 * kI * std::log(1.0 - std::exp(2.0 * kI * w)); }
cplx dilog_exp_d2(cplx w) {
  cplx e = std::exp(2.0 * kI * w);
  return -4.0 * e / (1.0 - e);
}

Eigen::MatrixXcd to_eigen(const CMatrix& m) {
  Eigen::MatrixXcd e(m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) e(i, j) = m(i, j);
  return e;
}

double max_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

int sign_of(double x) { return x >= 0.0 ? 1 : -1; }

// Principal branch rotated so that det = -16 maps to 4i.
cplx sqrt_gram_det(cplx det) { return kI * std::sqrt(-det); }

}  // namespace

cplx determinant(const CMatrix& m) {
  if (m.rows == 0) return 1.0;
  return to_eigen(m).partialPivLu().determinant();
}

std::vector<cplx> solve(const CMatrix& a, const std::vector<cplx>& b) {
  Eigen::VectorXcd rhs(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) rhs(static_cast<Eigen::Index>(i)) = b[i];
  Eigen::VectorXcd x = to_eigen(a).partialPivLu().solve(rhs);
  return {x.data(), x.data() + x.size()};
}

DihedralAngles DihedralAngles::all(cplx a) {
  DihedralAngles d;
  d.alpha.fill(a);
  return d;
}

cplx DihedralAngles::tau(int i) const {
  const auto& v = kVertexTriples[static_cast<std::size_t>(i - 1)];
  return 0.5 * (alpha[static_cast<std::size_t>(v[0])] + alpha[static_cast<std::size_t>(v[1])] +
                alpha[static_cast<std::size_t>(v[2])]);
}

cplx DihedralAngles::eta(int j) const {
  cplx s = 0.0;
  for (int e : kSquares[static_cast<std::size_t>(j - 1)]) s += alpha[static_cast<std::size_t>(e)];
  return 0.5 * s;
}

bool in_admissible_region(const DihedralAngles& a, cplx xi, double tol) {
  double lo = -1e300, hi = kTwoPi;
  for (int i = 1; i <= 4; ++i) lo = std::max(lo, a.tau(i).real());
  for (int j = 1; j <= 3; ++j) hi = std::min(hi, a.eta(j).real());
  return xi.real() >= lo - tol && xi.real() <= hi + tol;
}

cplx potential_u(const DihedralAngles& a, cplx xi, bool check_domain) {
  if (check_domain && !in_admissible_region(a, xi)) {
    throw DomainError("potential_u: (alpha, xi) outside the admissible region");
  }
  cplx val = kPi * kPi + (xi - kPi) * (xi - kPi) - 2.0 * li2(1.0) - dilog_exp(xi - kPi);
  for (int i = 1; i <= 4; ++i) {
    cplx t = a.tau(i);
    for (int j = 1; j <= 3; ++j) {
      cplx d = a.eta(j) - t;
      val += 0.5 * d * d - 0.5 * dilog_exp(d);
    }
    val += -0.5 * (t - kPi) * (t - kPi) + 0.5 * dilog_exp(t - kPi);
    val += -(xi - t) * (xi - t) + dilog_exp(xi - t);
  }
  for (int j = 1; j <= 3; ++j) {
    cplx d = a.eta(j) - xi;
    val += -d * d + dilog_exp(d);
  }
  return val;
}

cplx potential_u_dxi(const DihedralAngles& a, cplx xi) {
  cplx d = 2.0 * (xi - kPi) - dilog_exp_d1(xi - kPi);
  for (int i = 1; i <= 4; ++i) d += -2.0 * (xi - a.tau(i)) + dilog_exp_d1(xi - a.tau(i));
  for (int j = 1; j <= 3; ++j) d += 2.0 * (a.eta(j) - xi) - dilog_exp_d1(a.eta(j) - xi);
  return d;
}

cplx potential_u_dxi2(const DihedralAngles& a, cplx xi) {
  cplx d = -12.0 - dilog_exp_d2(xi - kPi);
  for (int i = 1; i <= 4; ++i) d += dilog_exp_d2(xi - a.tau(i));
  for (int j = 1; j <= 3; ++j) d += dilog_exp_d2(a.eta(j) - xi);
  return d;
}

std::array<cplx, 6> potential_u_dalpha(const DihedralAngles& a, cplx xi) {
  std::array<cplx, 4> dtau{};
  std::array<cplx, 3> deta{};
  for (int i = 1; i <= 4; ++i) {
    cplx t = a.tau(i);
    cplx d = -(t - kPi) + 2.0 * (xi - t) + 0.5 * dilog_exp_d1(t - kPi) - dilog_exp_d1(xi - t);
    for (int j = 1; j <= 3; ++j) {
      d += -(a.eta(j) - t) + 0.5 * dilog_exp_d1(a.eta(j) - t);
    }
    dtau[static_cast<std::size_t>(i - 1)] = d;
  }
  for (int j = 1; j <= 3; ++j) {
    cplx e = a.eta(j);
    cplx d = -2.0 * (e - xi) + dilog_exp_d1(e - xi);
    for (int i = 1; i <= 4; ++i) d += (e - a.tau(i)) - 0.5 * dilog_exp_d1(e - a.tau(i));
    deta[static_cast<std::size_t>(j - 1)] = d;
  }
  std::array<cplx, 6> out{};
  for (std::size_t i = 0; i < 4; ++i)
    for (int e : kVertexTriples[i]) out[static_cast<std::size_t>(e)] += 0.5 * dtau[i];
  for (std::size_t j = 0; j < 3; ++j)
    for (int e : kSquares[j]) out[static_cast<std::size_t>(e)] += 0.5 * deta[j];
  return out;
}

double potential_v(const std::array<double, 6>& alpha, double xi) {
  DihedralAngles a;
  for (std::size_t k = 0; k < 6; ++k) a.alpha[k] = alpha[k];
  double v = -lobachevsky(xi - kPi);
  for (int i = 1; i <= 4; ++i) {
    double t = a.tau(i).real();
    for (int j = 1; j <= 3; ++j) v -= 0.5 * lobachevsky(a.eta(j).real() - t);
    v += 0.5 * lobachevsky(t - kPi) + lobachevsky(xi - t);
  }
  for (int j = 1; j <= 3; ++j) v += lobachevsky(a.eta(j).real() - xi);
  return v;
}

XiSolve solve_xi(const DihedralAngles& a, cplx guess, double tol, int max_iter) {
  XiSolve out{guess, std::abs(potential_u_dxi(a, guess)), 0};
  cplx x = guess, prev_x = guess;
  cplx f = potential_u_dxi(a, x), prev_f = f;
  for (int it = 1; it <= max_iter; ++it) {
    if (std::abs(f) < tol) break;
    cplx d2 = potential_u_dxi2(a, x);
    cplx step;
    if (std::abs(d2) > 1e-8) {
      step = f / d2;
    } else if (it > 1 && prev_f != f) {
      step = f * (x - prev_x) / (f - prev_f);
    } else {
      throw SolverError("solve_xi: second derivative vanishes at the initial point");
    }
    // Keep the iterate inside the strip where the dilogarithms stay on their sheet.
    double damp = 1.0;
    while (std::abs(damp * step) > 0.5) damp *= 0.5;
    prev_x = x;
    prev_f = f;
    x -= damp * step;
    f = potential_u_dxi(a, x);
    out = {x, std::abs(f), it};
  }
  out.xi = x;
  out.residual = std::abs(f);
  return out;
}

namespace {

// On the real slice U = 2 pi^2 + 2i V and V is strictly concave in xi, so
// Im dU/dxi changes sign exactly once between max tau and min(eta, 2 pi).
std::optional<double> bracket_real_xi(const DihedralAngles& a) {
  double lo = -1e300, hi = kTwoPi;
  for (int i = 1; i <= 4; ++i) {
    if (a.tau(i).imag() != 0.0) return std::nullopt;
    lo = std::max(lo, a.tau(i).real());
  }
  for (int j = 1; j <= 3; ++j) {
    if (a.eta(j).imag() != 0.0) return std::nullopt;
    hi = std::min(hi, a.eta(j).real());
  }
  if (!(hi - lo > 1e-9)) return std::nullopt;
  auto slope = [&](double x) { return potential_u_dxi(a, x).imag(); };
  double l = lo + 1e-9 * (hi - lo), h = hi - 1e-9 * (hi - lo);
  double fl = slope(l), fh = slope(h);
  if (!(fl > 0.0 && fh < 0.0)) return std::nullopt;
  for (int it = 0; it < 200 && h - l > 1e-13; ++it) {
    double m = 0.5 * (l + h);
    (slope(m) > 0.0 ? l : h) = m;
  }
  return 0.5 * (l + h);
}

}  // namespace

cplx xi_of_alpha(const DihedralAngles& a) {
  cplx guess = 1.75 * kPi;
  if (auto x = bracket_real_xi(a)) guess = *x;
  XiSolve s = solve_xi(a, guess);
  if (!(s.residual < 1e-12)) {
    throw SolverError("xi_of_alpha: no convergence after " + std::to_string(s.iterations) +
                      " iterations, residual " + std::to_string(s.residual));
  }
  return s.xi;
}

GramMatrix gram_matrix(const std::array<cplx, 6>& z) {
  auto c = [&](int k) { return -std::cosh(z[static_cast<std::size_t>(k - 1)]); };
  GramMatrix g;
  g.entries = {{{1.0, c(1), c(2), c(6)},
                {c(1), 1.0, c(3), c(5)},
                {c(2), c(3), 1.0, c(4)},
                {c(6), c(5), c(4), 1.0}}};
  CMatrix m(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = g.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  g.det = determinant(m);
  return g;
}

std::array<double, 4> gram_vertex_minors(const std::array<double, 6>& theta) {
  std::array<cplx, 6> z{};
  for (std::size_t k = 0; k < 6; ++k) z[k] = cplx(0.0, theta[k]);
  GramMatrix g = gram_matrix(z);
  // The vertex (1,2,3) is opposite the face of row 4, (1,5,6) of row 3, and so on.
  constexpr std::array<int, 4> dropped{3, 2, 1, 0};
  std::array<double, 4> out{};
  for (std::size_t v = 0; v < 4; ++v) {
    Eigen::Matrix3d m;
    int ri = 0;
    for (int i = 0; i < 4; ++i) {
      if (i == dropped[v]) continue;
      int ci = 0;
      for (int j = 0; j < 4; ++j) {
        if (j == dropped[v]) continue;
        m(ri, ci++) = g.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].real();
      }
      ++ri;
    }
    out[v] = m.determinant();
  }
  return out;
}

bool is_hyperideal_angles(const std::array<double, 6>& theta, double tol) {
  for (double t : theta) {
    if (!(t >= -tol && t < kPi - tol)) return false;
  }
  for (const auto& v : kVertexTriples) {
    double s = theta[static_cast<std::size_t>(v[0])] + theta[static_cast<std::size_t>(v[1])] +
               theta[static_cast<std::size_t>(v[2])];
    if (!(s < kPi - tol)) return false;
  }
  return true;
}

double truncated_tet_volume(const std::array<double, 6>& theta) {
  std::array<double, 6> dihedral{};
  for (std::size_t k = 0; k < 6; ++k) dihedral[k] = 0.5 * theta[k];
  if (!is_hyperideal_angles(dihedral)) {
    throw DomainError("truncated_tet_volume: angles do not bound a truncated hyperideal tetrahedron");
  }
  DihedralAngles a;
  std::array<double, 6> alpha{};
  for (std::size_t k = 0; k < 6; ++k) {
    alpha[k] = kPi - dihedral[k];
    a.alpha[k] = alpha[k];
  }
  cplx xi = xi_of_alpha(a);
  return potential_v(alpha, xi.real());
}

// ---------------------------------------------------------------------------

FillingSystem::FillingSystem(FslPresentation p, SurgeryPresentation s, std::vector<int> E,
                             std::vector<double> beta_I, std::vector<double> alpha_J)
    : p_(std::move(p)),
      s_(std::move(s)),
      E_(std::move(E)),
      beta_I_(std::move(beta_I)),
      alpha_J_(std::move(alpha_J)) {
  require_valid(p_);
  unfilled_ = unfilled_components(p_, s_);
  nI_ = static_cast<int>(s_.filled.size());
  if (static_cast<int>(E_.size()) != nI_ || static_cast<int>(beta_I_.size()) != nI_) {
    throw DomainError("FillingSystem: E and beta_I need one entry per filled component");
  }
  if (alpha_J_.size() != unfilled_.size()) {
    throw DomainError("FillingSystem: alpha_J needs one entry per unfilled component");
  }
  for (int e : E_) {
    if (e != 1 && e != -1) throw DomainError("FillingSystem: E entries must be +1 or -1");
  }
}

std::vector<cplx> FillingSystem::component_alphas(const std::vector<cplx>& alpha_filled) const {
  std::vector<cplx> a(static_cast<std::size_t>(p_.n), kPi);
  for (int f = 0; f < nI_; ++f)
    a[static_cast<std::size_t>(s_.filled[static_cast<std::size_t>(f)].component)] =
        alpha_filled[static_cast<std::size_t>(f)];
  for (std::size_t j = 0; j < unfilled_.size(); ++j)
    a[static_cast<std::size_t>(unfilled_[j])] = alpha_J_[j];
  return a;
}

DihedralAngles FillingSystem::block_angles(const std::vector<cplx>& comp_alpha, int s) const {
  DihedralAngles d;
  const auto& inc = p_.incidence[static_cast<std::size_t>(s)];
  for (std::size_t k = 0; k < 6; ++k) d.alpha[k] = comp_alpha[static_cast<std::size_t>(inc[k] - 1)];
  return d;
}

std::vector<cplx> FillingSystem::initial_point() const {
  std::vector<cplx> x(static_cast<std::size_t>(dim()), kPi);
  for (int s = 0; s < p_.c; ++s) x[static_cast<std::size_t>(nI_ + s)] = 1.75 * kPi;
  return x;
}

cplx FillingSystem::value(const std::vector<cplx>& x) const {
  std::vector<cplx> af(x.begin(), x.begin() + nI_);
  auto ca = component_alphas(af);
  cplx v = 0.0;
  for (int f = 0; f < nI_; ++f) {
    const auto& fc = s_.filled[static_cast<std::size_t>(f)];
    double q = static_cast<double>(fc.q);
    double b = beta_I_[static_cast<std::size_t>(f)] - kPi;
    cplx a = af[static_cast<std::size_t>(f)] - kPi;
    double a0 = p_.framing[static_cast<std::size_t>(fc.component)];
    v += -(static_cast<double>(fc.dual.p_prime) / q + a0) * b * b -
         (static_cast<double>(fc.p) * a * a + 2.0 * E_[static_cast<std::size_t>(f)] * b * a) / q;
  }
  for (std::size_t j = 0; j < unfilled_.size(); ++j) {
    double a = alpha_J_[j] - kPi;
    v -= p_.framing[static_cast<std::size_t>(unfilled_[j])] * a * a;
  }
  double iota_sum = 0.0;
  for (int i = 0; i < p_.n; ++i) {
    double io = p_.iota[static_cast<std::size_t>(i)];
    cplx a = ca[static_cast<std::size_t>(i)] - kPi;
    v -= 0.5 * io * a * a;
    iota_sum += 0.5 * io;
  }
  for (int s = 0; s < p_.c; ++s) v += potential_u(block_angles(ca, s), x[static_cast<std::size_t>(nI_ + s)], false);
  return v + iota_sum * kPi * kPi;
}

std::vector<cplx> FillingSystem::component_derivatives(const std::vector<cplx>& comp_alpha,
                                                       const std::vector<cplx>& xi) const {
  std::vector<cplx> d(static_cast<std::size_t>(p_.n), 0.0);
  for (int s = 0; s < p_.c; ++s) {
    auto g = potential_u_dalpha(block_angles(comp_alpha, s), xi[static_cast<std::size_t>(s)]);
    const auto& inc = p_.incidence[static_cast<std::size_t>(s)];
    for (std::size_t k = 0; k < 6; ++k) d[static_cast<std::size_t>(inc[k] - 1)] += g[k];
  }
  for (int i = 0; i < p_.n; ++i)
    d[static_cast<std::size_t>(i)] -= static_cast<double>(p_.iota[static_cast<std::size_t>(i)]) *
                                      (comp_alpha[static_cast<std::size_t>(i)] - kPi);
  return d;
}

std::vector<cplx> FillingSystem::gradient(const std::vector<cplx>& x) const {
  std::vector<cplx> af(x.begin(), x.begin() + nI_);
  std::vector<cplx> xi(x.begin() + nI_, x.end());
  auto ca = component_alphas(af);
  auto cd = component_derivatives(ca, xi);
  std::vector<cplx> g(static_cast<std::size_t>(dim()));
  for (int f = 0; f < nI_; ++f) {
    const auto& fc = s_.filled[static_cast<std::size_t>(f)];
    double q = static_cast<double>(fc.q);
    cplx a = af[static_cast<std::size_t>(f)] - kPi;
    double b = beta_I_[static_cast<std::size_t>(f)] - kPi;
    g[static_cast<std::size_t>(f)] = cd[static_cast<std::size_t>(fc.component)] -
                                     (2.0 * static_cast<double>(fc.p) * a + 2.0 * E_[static_cast<std::size_t>(f)] * b) / q;
  }
  for (int s = 0; s < p_.c; ++s)
    g[static_cast<std::size_t>(nI_ + s)] = potential_u_dxi(block_angles(ca, s), xi[static_cast<std::size_t>(s)]);
  return g;
}

CMatrix FillingSystem::hessian(const std::vector<cplx>& x, double step) const {
  const int d = dim();
  CMatrix h(d, d);
  for (int k = 0; k < d; ++k) {
    auto xp = x, xm = x;
    xp[static_cast<std::size_t>(k)] += step;
    xm[static_cast<std::size_t>(k)] -= step;
    auto gp = gradient(xp), gm = gradient(xm);
    for (int i = 0; i < d; ++i)
      h(i, k) = (gp[static_cast<std::size_t>(i)] - gm[static_cast<std::size_t>(i)]) / (2.0 * step);
  }
  return h;
}

PotentialEval FillingSystem::evaluate(const std::vector<cplx>& x) const {
  return {value(x), gradient(x), hessian(x)};
}

PotentialEval system_potential(const FslPresentation& p, const SurgeryPresentation& s,
                               const std::vector<int>& E, const std::vector<double>& beta_I,
                               const std::vector<double>& alpha_J, const std::vector<cplx>& x) {
  FillingSystem sys(p, s, E, beta_I, alpha_J);
  if (static_cast<int>(x.size()) != sys.dim()) {
    throw DomainError("system_potential: expected " + std::to_string(sys.dim()) + " variables");
  }
  return sys.evaluate(x);
}

// ---------------------------------------------------------------------------

namespace {

// Per-component sign eps_k with alpha_k = pi + (i eps_k / 2) H(u_k).
std::vector<int> holonomy_signs(const FslPresentation& p, const SurgeryPresentation& s,
                                const GeometricSolution& sol) {
  std::vector<int> eps(static_cast<std::size_t>(p.n));
  for (int i = 0; i < p.n; ++i) {
    int f = s.filled_index(i);
    eps[static_cast<std::size_t>(i)] =
        f >= 0 ? sol.E[static_cast<std::size_t>(f)] * sol.mu[static_cast<std::size_t>(i)]
               : -sol.mu[static_cast<std::size_t>(i)];
  }
  return eps;
}

void fill_holonomies(const FillingSystem& sys, GeometricSolution& sol) {
  const auto& p = sys.presentation();
  const auto& s = sys.surgery();
  auto ca = sys.component_alphas(sol.alpha_star);
  auto eps = holonomy_signs(p, s, sol);
  auto dU = sys.component_derivatives(ca, sol.xi_star);
  sol.H_u.assign(static_cast<std::size_t>(p.n), 0.0);
  sol.H_v.assign(static_cast<std::size_t>(p.n), 0.0);
  sol.H_gamma.assign(static_cast<std::size_t>(p.n), 0.0);
  sol.filling_residual = 0.0;
  for (int i = 0; i < p.n; ++i) {
    auto ui = static_cast<std::size_t>(i);
    double e = eps[ui];
    sol.H_u[ui] = -2.0 * kI * (ca[ui] - kPi) / e;
    sol.H_v[ui] = kI * e * dU[ui];
    double a0 = p.framing[ui];
    int f = s.filled_index(i);
    if (f >= 0) {
      const auto& fc = s.filled[static_cast<std::size_t>(f)];
      double q = static_cast<double>(fc.q);
      double th = sol.theta[ui];
      sol.H_gamma[ui] = -sol.H_u[ui] / q + (static_cast<double>(fc.dual.p_prime) / q + a0) * th * kI;
      cplx df = static_cast<double>(fc.p) * sol.H_u[ui] + q * sol.H_v[ui] - kI * th;
      sol.filling_residual = std::max(sol.filling_residual, std::abs(df));
    } else {
      sol.H_gamma[ui] = a0 * sol.H_u[ui] + sol.H_v[ui];
    }
  }
  sol.lengths = edge_lengths(p, s, sol);
}

}  // namespace

GeometricSolution find_critical_point(const FslPresentation& p, const SurgeryPresentation& s,
                                      const std::vector<int>& E, const std::vector<double>& beta_I,
                                      const std::vector<double>& alpha_J, const SolverOptions& options) {
  if (!options.force) {
    for (double b : beta_I)
      if (std::abs(b - kPi) > options.angle_gate)
        throw DomainError("find_critical_point: |beta - pi| exceeds the small-angle gate");
    for (double a : alpha_J)
      if (std::abs(a - kPi) > options.angle_gate)
        throw DomainError("find_critical_point: |alpha - pi| exceeds the small-angle gate");
  }
  FillingSystem sys(p, s, E, beta_I, alpha_J);
  const int nI = sys.filled_count();
  auto x = sys.initial_point();
  auto g = sys.gradient(x);
  double res = max_abs(g);
  int it = 0;
  for (; it < options.max_iterations && res >= options.tolerance; ++it) {
    CMatrix h = sys.hessian(x);
    if (std::abs(determinant(h)) < 1e-14) {
      throw SolverError("find_critical_point: Hessian is singular; the small-angle regime does not hold");
    }
    auto step = solve(h, g);
    double damp = 1.0;
    std::vector<cplx> trial;
    double trial_res = 0.0;
    for (int ls = 0; ls < 30; ++ls) {
      trial = x;
      for (std::size_t k = 0; k < x.size(); ++k) trial[k] -= damp * step[k];
      trial_res = max_abs(sys.gradient(trial));
      if (std::isfinite(trial_res) && trial_res < res) break;
      damp *= 0.5;
    }
    if (!(trial_res < res)) break;  // stagnated at rounding level
    x = std::move(trial);
    g = sys.gradient(x);
    res = trial_res;
  }
  if (!std::isfinite(res) || res > std::max(options.tolerance, 1e-10)) {
    throw SolverError("find_critical_point: Newton did not converge, residual " + std::to_string(res));
  }

  GeometricSolution sol;
  sol.alpha_star.assign(x.begin(), x.begin() + nI);
  sol.xi_star.assign(x.begin() + nI, x.end());
  auto ca = sys.component_alphas(sol.alpha_star);
  for (int b = 0; b < p.c; ++b) {
    if (!in_admissible_region(sys.block_angles(ca, b), sol.xi_star[static_cast<std::size_t>(b)], 1e-6)) {
      throw SolverError("find_critical_point: critical point left the admissible region");
    }
  }
  sol.critical_value = sys.value(x);
  sol.hessian = sys.hessian(x);
  sol.E = E;
  sol.beta_I = beta_I;
  sol.alpha_J = alpha_J;
  sol.converged = true;
  sol.residual = res;
  sol.iterations = it;
  sol.vol = sol.critical_value.imag();
  sol.cs_raw = -(sol.critical_value.real() - 2.0 * p.c * kPi * kPi);
  const double p2 = kPi * kPi;
  sol.cs = sol.cs_raw - p2 * std::floor(sol.cs_raw / p2);
  if (sol.cs >= p2) sol.cs -= p2;

  auto unfilled = unfilled_components(p, s);
  sol.mu.assign(static_cast<std::size_t>(p.n), 1);
  sol.theta.assign(static_cast<std::size_t>(p.n), 0.0);
  for (std::size_t f = 0; f < s.filled.size(); ++f) {
    auto c = static_cast<std::size_t>(s.filled[f].component);
    sol.mu[c] = sign_of(beta_I[f] - kPi);
    sol.theta[c] = 2.0 * std::abs(beta_I[f] - kPi);
  }
  for (std::size_t j = 0; j < unfilled.size(); ++j) {
    auto c = static_cast<std::size_t>(unfilled[j]);
    sol.mu[c] = sign_of(alpha_J[j] - kPi);
    sol.theta[c] = 2.0 * std::abs(alpha_J[j] - kPi);
  }
  fill_holonomies(sys, sol);
  return sol;
}

std::vector<cplx> edge_lengths(const FslPresentation& p, const SurgeryPresentation& s,
                               const GeometricSolution& sol) {
  FillingSystem sys(p, s, sol.E, sol.beta_I, sol.alpha_J);
  auto ca = sys.component_alphas(sol.alpha_star);
  auto eps = holonomy_signs(p, s, sol);
  // dW/d alpha equals dU/d alpha at xi(alpha), so the per-slot gradients are
  // taken at the solved xi.
  std::vector<cplx> sum(static_cast<std::size_t>(p.n), 0.0);
  for (int b = 0; b < p.c; ++b) {
    auto g = potential_u_dalpha(sys.block_angles(ca, b), sol.xi_star[static_cast<std::size_t>(b)]);
    const auto& inc = p.incidence[static_cast<std::size_t>(b)];
    for (std::size_t k = 0; k < 6; ++k) sum[static_cast<std::size_t>(inc[k] - 1)] += g[k];
  }
  std::vector<cplx> l(static_cast<std::size_t>(p.n));
  for (std::size_t i = 0; i < l.size(); ++i) l[i] = -kI * static_cast<double>(eps[i]) * sum[i];
  return l;
}

TorsionReport torsion(const FslPresentation& p, const SurgeryPresentation& s,
                      const GeometricSolution& sol, double step) {
  if (!sol.converged) throw SolverError("torsion: solution did not converge");
  FillingSystem sys(p, s, sol.E, sol.beta_I, sol.alpha_J);
  const int nI = sys.filled_count();
  auto eps = holonomy_signs(p, s, sol);
  TorsionReport rep;

  // Gram factors at H(u)/2; cosh(H(u)/2) = cos(alpha - pi) in every convention.
  auto ca = sys.component_alphas(sol.alpha_star);
  cplx prod_gram = 1.0;
  cplx prod_uxixi = 1.0;
  for (int b = 0; b < p.c; ++b) {
    const auto& inc = p.incidence[static_cast<std::size_t>(b)];
    std::array<cplx, 6> z{};
    for (std::size_t k = 0; k < 6; ++k) z[k] = 0.5 * sol.H_u[static_cast<std::size_t>(inc[k] - 1)];
    cplx sq = sqrt_gram_det(gram_matrix(z).det);
    rep.sqrt_det_gram.push_back(sq);
    prod_gram *= sq;

    DihedralAngles a = sys.block_angles(ca, b);
    cplx xi = sol.xi_star[static_cast<std::size_t>(b)];
    cplx uxx = potential_u_dxi2(a, xi);
    prod_uxixi *= uxx;
    cplx expo = 4.0 * kI * xi;
    for (std::size_t k = 0; k < 6; ++k) expo -= kI * a.alpha[k];
    for (int i = 1; i <= 4; ++i) expo -= std::log(1.0 - std::exp(2.0 * kI * (xi - a.tau(i))));
    rep.gram_identity_lhs.push_back(std::exp(expo) / uxx);
    rep.gram_identity_rhs.push_back(-1.0 / (16.0 * sq));
  }
  rep.torsion_u = std::pow(2.0, 3 * p.c) * prod_gram;

  // H(v) on the filled components as a function of H(u) there, re-solving xi.
  auto hv_of_hu = [&](const std::vector<cplx>& hu) {
    std::vector<cplx> af(static_cast<std::size_t>(nI));
    for (int f = 0; f < nI; ++f) {
      int c = s.filled[static_cast<std::size_t>(f)].component;
      af[static_cast<std::size_t>(f)] =
          kPi + 0.5 * kI * static_cast<double>(eps[static_cast<std::size_t>(c)]) * hu[static_cast<std::size_t>(f)];
    }
    auto comp = sys.component_alphas(af);
    std::vector<cplx> xi(static_cast<std::size_t>(p.c));
    for (int b = 0; b < p.c; ++b) {
      XiSolve xs = solve_xi(sys.block_angles(comp, b), sol.xi_star[static_cast<std::size_t>(b)], 1e-13);
      if (!(xs.residual < 1e-11)) throw SolverError("torsion: xi re-solve failed in the Jacobian");
      xi[static_cast<std::size_t>(b)] = xs.xi;
    }
    auto d = sys.component_derivatives(comp, xi);
    std::vector<cplx> hv(static_cast<std::size_t>(nI));
    for (int f = 0; f < nI; ++f) {
      auto c = static_cast<std::size_t>(s.filled[static_cast<std::size_t>(f)].component);
      hv[static_cast<std::size_t>(f)] = kI * static_cast<double>(eps[c]) * d[c];
    }
    return hv;
  };

  std::vector<cplx> hu0(static_cast<std::size_t>(nI));
  for (int f = 0; f < nI; ++f)
    hu0[static_cast<std::size_t>(f)] = sol.H_u[static_cast<std::size_t>(s.filled[static_cast<std::size_t>(f)].component)];
  rep.jacobian = CMatrix(nI, nI);
  for (int k = 0; k < nI; ++k) {
    auto hp = hu0, hm = hu0;
    hp[static_cast<std::size_t>(k)] += step;
    hm[static_cast<std::size_t>(k)] -= step;
    auto vp = hv_of_hu(hp), vm = hv_of_hu(hm);
    for (int i = 0; i < nI; ++i) {
      const auto& fc = s.filled[static_cast<std::size_t>(i)];
      cplx dv = (vp[static_cast<std::size_t>(i)] - vm[static_cast<std::size_t>(i)]) / (2.0 * step);
      rep.jacobian(i, k) = (i == k ? static_cast<double>(fc.p) : 0.0) + static_cast<double>(fc.q) * dv;
    }
  }
  rep.jacobian_det = determinant(rep.jacobian);
  rep.torsion = rep.jacobian_det * rep.torsion_u;

  double prod_q = 1.0;
  for (const auto& fc : s.filled) prod_q *= static_cast<double>(fc.q);
  rep.hessian_identity_lhs = -prod_q * determinant(sol.hessian);
  rep.hessian_identity_rhs = -std::pow(-2.0, nI) * rep.jacobian_det * prod_uxixi;
  return rep;
}

}  // namespace shadowrt
