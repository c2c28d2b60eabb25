#include "shadowrt/sixj.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "shadowrt/errors.hpp"
#include "shadowrt/geometry.hpp"

namespace shadowrt {

namespace {

// Edge k joins the vertex triples listed here (0-based).
constexpr std::array<std::array<int, 2>, 6> kEdgeVertices{{
    {0, 1}, {0, 2}, {0, 3}, {2, 3}, {1, 3}, {1, 2}}};

int edge_between(int a, int b) {
  for (int e = 0; e < 6; ++e) {
    auto [u, v] = kEdgeVertices[static_cast<std::size_t>(e)];
    if ((u == a && v == b) || (u == b && v == a)) return e;
  }
  return -1;
}

std::string tuple_text(const SixTuple& t) {
  std::string s = "(";
  for (int i = 0; i < 6; ++i) {
    if (i) s += ",";
    s += std::to_string(t.m[static_cast<std::size_t>(i)]);
  }
  return s + ")";
}

void guard_factorial(const RootContext& ctx, int n) {
  if (n < 0 || n > ctx.r() - 1) {
    throw InvariantViolation("sixj: factorial argument " + std::to_string(n) + " out of range");
  }
}

// log|[n]!| in the precision the context asks for.
inline DoubleDouble log_fact(const RootContext& ctx, int n) {
  guard_factorial(ctx, n);
  return ctx.log_abs_qfact_dd(n);
}

LogComplex sixj_unchecked(const RootContext& ctx, const SixTuple& t) {
  const int r = ctx.r();
  const bool extended = ctx.precision() == Precision::extended;
  std::array<int, 4> T{};
  std::array<int, 3> Q{};
  for (int i = 0; i < 4; ++i) T[static_cast<std::size_t>(i)] = t.T(i + 1);
  for (int j = 0; j < 3; ++j) Q[static_cast<std::size_t>(j)] = t.Q(j + 1);
  const int kmin = *std::max_element(T.begin(), T.end());
  const int kmax = std::min(*std::min_element(Q.begin(), Q.end()), r - 2);

  LogComplex pref = LogComplex(0.0, -0.5 * kPi * t.sum());
  for (const auto& v : kVertexTriples) {
    pref *= delta(ctx, t.m[static_cast<std::size_t>(v[0])], t.m[static_cast<std::size_t>(v[1])],
                  t.m[static_cast<std::size_t>(v[2])]);
  }
  if (kmin > kmax) return LogComplex::zero();

  // Terms are real: (-1)^k [k+1]! / (prod [k-T_i]! prod [Q_j-k]!).
  const auto count = static_cast<std::size_t>(kmax - kmin + 1);
  std::vector<DoubleDouble> logs(count);
  std::vector<int> signs(count);
  DoubleDouble lmax(-std::numeric_limits<double>::infinity());
  for (int k = kmin; k <= kmax; ++k) {
    DoubleDouble l = log_fact(ctx, k + 1);
    int parity = k + ctx.qfact_parity(k + 1);
    for (int ti : T) {
      l -= log_fact(ctx, k - ti);
      parity += ctx.qfact_parity(k - ti);
    }
    for (int qj : Q) {
      l -= log_fact(ctx, qj - k);
      parity += ctx.qfact_parity(qj - k);
    }
    if (!extended) l = DoubleDouble(l.value());
    auto idx = static_cast<std::size_t>(k - kmin);
    logs[idx] = l;
    signs[idx] = (parity % 2 == 0) ? 1 : -1;
    if (l.value() > lmax.value()) lmax = l;
  }

  double sum = 0.0, comp = 0.0;
  DoubleDouble sum_dd;
  for (std::size_t idx = 0; idx < count; ++idx) {
    double w = signs[idx] * std::exp((logs[idx] - lmax).value());
    if (extended) {
      sum_dd += DoubleDouble(w);
    } else {
      double tsum = sum + w;
      comp += std::abs(sum) >= std::abs(w) ? (sum - tsum) + w : (w - tsum) + sum;
      sum = tsum;
    }
  }
  double total = extended ? sum_dd.value() : sum + comp;
  if (total == 0.0) return LogComplex::zero();
  LogComplex s(std::log(std::abs(total)) + lmax.value(), total < 0 ? kPi : 0.0);
  return pref * s;
}

}  // namespace

int SixTuple::T(int i) const {
  const auto& v = kVertexTriples[static_cast<std::size_t>(i - 1)];
  return (m[static_cast<std::size_t>(v[0])] + m[static_cast<std::size_t>(v[1])] +
          m[static_cast<std::size_t>(v[2])]) / 2;
}

int SixTuple::Q(int j) const {
  const auto& v = kSquares[static_cast<std::size_t>(j - 1)];
  int s = 0;
  for (int e : v) s += m[static_cast<std::size_t>(e)];
  return s / 2;
}

bool is_admissible_triple(int r, int m1, int m2, int m3) {
  for (int m : {m1, m2, m3}) {
    if (m < 0 || m > r - 3 || m % 2 != 0) return false;
  }
  if (m1 + m2 - m3 < 0 || m2 + m3 - m1 < 0 || m3 + m1 - m2 < 0) return false;
  return m1 + m2 + m3 <= 2 * (r - 2);
}

bool is_admissible(int r, const SixTuple& t) {
  for (const auto& v : kVertexTriples) {
    if (!is_admissible_triple(r, t.m[static_cast<std::size_t>(v[0])], t.m[static_cast<std::size_t>(v[1])],
                              t.m[static_cast<std::size_t>(v[2])])) {
      return false;
    }
  }
  return true;
}

LogComplex delta(const RootContext& ctx, int m1, int m2, int m3) {
  if (!is_admissible_triple(ctx.r(), m1, m2, m3)) {
    throw DomainError("delta: triple (" + std::to_string(m1) + "," + std::to_string(m2) + "," +
                      std::to_string(m3) + ") is not admissible at r=" + std::to_string(ctx.r()));
  }
  const int T = (m1 + m2 + m3) / 2;
  double l = 0.0;
  int parity = 0;
  for (int n : {T - m1, T - m2, T - m3}) {
    l += ctx.log_abs_qfact(n);
    parity += ctx.qfact_parity(n);
  }
  l -= ctx.log_abs_qfact(T + 1);
  parity += ctx.qfact_parity(T + 1);
  return {0.5 * l, (parity % 2) ? 0.5 * kPi : 0.0};
}

LogComplex sixj(const RootContext& ctx, const SixTuple& t) {
  if (!is_admissible(ctx.r(), t)) {
    throw DomainError("sixj: tuple " + tuple_text(t) + " is not admissible at r=" +
                      std::to_string(ctx.r()));
  }
  return sixj_unchecked(ctx, t);
}

LogComplex sixj_lenient(const RootContext& ctx, const SixTuple& t) {
  if (!is_admissible(ctx.r(), t)) return LogComplex::zero();
  return sixj_unchecked(ctx, t);
}

std::array<SixTuple, 24> tetrahedral_orbit(const SixTuple& t) {
  std::array<SixTuple, 24> out{};
  std::array<int, 4> perm{0, 1, 2, 3};
  std::size_t n = 0;
  do {
    SixTuple img;
    for (int e = 0; e < 6; ++e) {
      auto [a, b] = kEdgeVertices[static_cast<std::size_t>(e)];
      int target = edge_between(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
      img.m[static_cast<std::size_t>(target)] = t.m[static_cast<std::size_t>(e)];
    }
    out[n++] = img;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

SixTuple orbit_representative(const SixTuple& t) {
  auto orbit = tetrahedral_orbit(t);
  return *std::min_element(orbit.begin(), orbit.end(),
                           [](const SixTuple& a, const SixTuple& b) { return a.m < b.m; });
}

std::size_t SixjCache::KeyHash::operator()(const Key& k) const {
  std::size_t h = std::hash<int>()(k.r) * 1000003u ^ std::hash<int>()(k.precision);
  for (int v : k.m) h = h * 1000003u ^ std::hash<int>()(v);
  return h;
}

SixjCache::SixjCache(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

LogComplex SixjCache::get(const RootContext& ctx, const SixTuple& t) {
  Key key{ctx.r(), static_cast<int>(ctx.precision()), orbit_representative(t).m};
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = index_.find(key);
    if (it != index_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      ++hits_;
      return it->second->second;
    }
    ++misses_;
  }
  SixTuple rep;
  rep.m = key.m;
  LogComplex v = sixj_lenient(ctx, rep);
  std::lock_guard<std::mutex> lock(mu_);
  if (index_.find(key) == index_.end()) {
    order_.emplace_front(key, v);
    index_[key] = order_.begin();
    if (order_.size() > capacity_) {
      index_.erase(order_.back().first);
      order_.pop_back();
    }
  }
  return v;
}

std::size_t SixjCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return order_.size();
}
std::size_t SixjCache::hits() const {
  std::lock_guard<std::mutex> lock(mu_);
  return hits_;
}
std::size_t SixjCache::misses() const {
  std::lock_guard<std::mutex> lock(mu_);
  return misses_;
}

std::array<double, 6> coloring_angles(int r, const SixTuple& t) {
  std::array<double, 6> th{};
  for (std::size_t i = 0; i < 6; ++i) th[i] = std::abs(kPi - kTwoPi * t.m[i] / r);
  return th;
}

bool is_hyperideal_coloring(int r, const SixTuple& t) {
  return is_admissible(r, t) && is_hyperideal_angles(coloring_angles(r, t));
}

cplx potential_ur(const PhiGrid& phi, const SixTuple& t, int k) {
  const int r = phi.context().r();
  const double h = kTwoPi / r;  // 2 pi / r
  std::array<double, 4> tau{};
  std::array<double, 3> eta{};
  for (int i = 0; i < 4; ++i) tau[static_cast<std::size_t>(i)] = h * t.T(i + 1);
  for (int j = 0; j < 3; ++j) eta[static_cast<std::size_t>(j)] = h * t.Q(j + 1);
  const double xi = h * k;

  double quad = kPi * kPi - h * h;
  for (double ti : tau) {
    for (double ej : eta) quad += 0.5 * (ej - ti) * (ej - ti);
    quad -= 0.5 * (ti + h - kPi) * (ti + h - kPi);
    quad -= (xi - ti) * (xi - ti);
  }
  quad += (xi + h - kPi) * (xi + h - kPi);
  for (double ej : eta) quad -= (ej - xi) * (ej - xi);

  // Every phi argument is an odd or shifted multiple of pi/r.
  cplx val = quad - 2.0 * phi.at(1);
  for (int i = 1; i <= 4; ++i) {
    for (int j = 1; j <= 3; ++j) val -= 0.5 * phi.at(2 * (t.Q(j) - t.T(i)) + 1);
    val += 0.5 * phi.at(2 * t.T(i) + 3 - r);
    val += phi.at(2 * (k - t.T(i)) + 1);
  }
  val -= phi.at(2 * k + 3 - r);
  for (int j = 1; j <= 3; ++j) val += phi.at(2 * (t.Q(j) - k) + 1);
  return val;
}

namespace {

// Exponent E with {n}! = c exp(r E / (4 pi i)), c = 1 direct, 2 moved.
cplx factorial_exponent(const PhiGrid& phi, int n, bool moved) {
  const int r = phi.context().r();
  const double h = kTwoPi / r;
  return -kTwoPi * h * n + h * h * (n * n + n) + phi.at(1) - phi.at(moved ? 2 * n + 1 - r : 2 * n + 1);
}

// The potential takes the root of each triangle coefficient as exp(E / 2).
// The definition takes sqrt of a real radicand (i sqrt|x| when negative).
// Both square to the same thing; this returns the product of the four ratios.
double triangle_branch_sign(const PhiGrid& phi, const SixTuple& t) {
  const RootContext& ctx = phi.context();
  const int r = ctx.r();
  const double scale = r / (4.0 * kPi);
  const double root_one_arg = 0.5 * std::arg(qdiff(ctx, 1));
  double phase = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& v = kVertexTriples[i];
    const int T = t.T(static_cast<int>(i) + 1);
    cplx e = -factorial_exponent(phi, T + 1, true);
    for (int edge : v) e += factorial_exponent(phi, T - t.m[static_cast<std::size_t>(edge)], false);
    // arg of exp(r e / (8 pi i)) is -scale Re(e) / 2
    double root_arg = -0.5 * scale * e.real();
    double def_arg = delta(ctx, t.m[v[0]], t.m[v[1]], t.m[v[2]]).arg() - root_one_arg;
    phase += def_arg - root_arg;
  }
  return std::cos(phase) < 0.0 ? -1.0 : 1.0;
}

}  // namespace

UrEvaluation sixj_via_ur(const PhiGrid& phi, const SixTuple& t) {
  const RootContext& ctx = phi.context();
  const int r = ctx.r();
  if (!is_admissible(r, t)) {
    throw DomainError("sixj_via_ur: tuple " + tuple_text(t) + " is not admissible");
  }
  if (!is_hyperideal_coloring(r, t)) return {sixj(ctx, t), true};

  int kmin = 0, kmax = r - 2;
  for (int i = 1; i <= 4; ++i) kmin = std::max(kmin, t.T(i));
  for (int j = 1; j <= 3; ++j) kmax = std::min(kmax, t.Q(j));
  std::vector<LogComplex> terms;
  const double scale = r / (4.0 * kPi);
  for (int k = kmin; k <= kmax; ++k) {
    cplx u = potential_ur(phi, t, k);
    // exp(r U / (4 pi i)) = exp(scale * (Im U - i Re U))
    terms.emplace_back(scale * u.imag(), -scale * u.real());
  }
  LogComplex sum = log_sum(terms, ctx.precision());
  LogComplex pref = LogComplex::from_complex(0.5 * triangle_branch_sign(phi, t) * qdiff(ctx, 1));
  return {pref * sum, false};
}

UrEvaluation sixj_via_ur(const RootContext& ctx, const ContourSpec& contour, const SixTuple& t) {
  PhiGrid phi(ctx, contour);
  return sixj_via_ur(phi, t);
}

int color_for_angle(int r, double theta) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int m = 0; m <= r - 3; m += 2) {
    double d = std::abs(std::abs(kPi - kTwoPi * m / r) - theta);
    if (d < best_d - 1e-15) {
      best_d = d;
      best = m;
    }
  }
  return best;
}

GrowthSeries sixj_growth(const std::vector<int>& r_values, const std::array<double, 6>& theta,
                         int threads, Precision precision) {
  GrowthSeries out;
  out.hyperideal_targets = is_hyperideal_angles(theta);
  const std::size_t n = r_values.size();
  std::vector<GrowthPoint> pts(n);
  std::vector<char> ok(n, 0);

  auto work = [&](std::size_t idx) {
    const int r = r_values[idx];
    SixTuple t;
    for (std::size_t i = 0; i < 6; ++i) t.m[i] = color_for_angle(r, theta[i]);
    if (!is_admissible(r, t)) return;
    RootContext ctx(r, precision);
    LogComplex v = sixj(ctx, t);
    pts[idx] = {r, t, kTwoPi / r * v.log_mag()};
    ok[idx] = 1;
  };

  // Each r is independent, so results do not depend on the split.
  const int nt = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int w = 0; w < nt; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t idx = static_cast<std::size_t>(w); idx < n; idx += static_cast<std::size_t>(nt)) work(idx);
    });
  }
  for (auto& th : pool) th.join();

  for (std::size_t idx = 0; idx < n; ++idx) {
    if (ok[idx]) {
      out.points.push_back(pts[idx]);
    } else {
      out.skipped.push_back(r_values[idx]);
    }
  }
  return out;
}

}  // namespace shadowrt
