#include "shadowrt/filling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "shadowrt/errors.hpp"

namespace shadowrt {

namespace {

RationalValue make_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw InvariantViolation("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return {num, den};
}

RationalValue add(RationalValue a, RationalValue b) {
  return make_rational(a.num * b.den + b.num * a.den, a.den * b.den);
}
RationalValue sub(RationalValue a, RationalValue b) { return add(a, {-b.num, b.den}); }
RationalValue mul(RationalValue a, RationalValue b) { return make_rational(a.num * b.num, a.den * b.den); }
RationalValue inv(RationalValue a) { return make_rational(a.den, a.num); }

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

std::string slope_text(std::int64_t p, std::int64_t q) {
  return std::to_string(p) + "/" + std::to_string(q);
}

}  // namespace

std::vector<std::int64_t> neg_cf(std::int64_t p, std::int64_t q) {
  if (q < 1 || std::gcd(p, q) != 1) {
    throw DomainError("neg_cf: slope " + slope_text(p, q) + " needs q >= 1 and gcd(p, q) = 1");
  }
  if (std::abs(p) <= q) {
    throw UnsupportedSlope("neg_cf: |p/q| <= 1 has no expansion with all |a_l| >= 2 (" +
                           slope_text(p, q) + ")");
  }
  if (p < 0) {
    auto a = neg_cf(-p, q);
    for (auto& x : a) x = -x;
    return a;
  }
  // Ceiling algorithm; produces a_z first.
  std::vector<std::int64_t> outer_first;
  std::int64_t num = p, den = q;
  while (den != 0) {
    std::int64_t a = ceil_div(num, den);
    outer_first.push_back(a);
    std::int64_t next = a * den - num;
    num = den;
    den = next;
  }
  return {outer_first.rbegin(), outer_first.rend()};
}

DualSlope dual_slope(std::int64_t p, std::int64_t q) {
  if (q < 1 || std::gcd(p, q) != 1) {
    throw DomainError("dual_slope: slope " + slope_text(p, q) + " needs q >= 1 and gcd(p, q) = 1");
  }
  if (p < 0) {
    DualSlope d = dual_slope(-p, q);
    return {-d.p_prime, d.q_prime};
  }
  // p' = -(q - p^{-1} mod q) lands in (-q, 0].
  std::int64_t inv_p = 0;
  {
    std::int64_t old_r = p % q, r = q, old_s = 1, s = 0;
    while (r != 0) {
      std::int64_t t = old_r / r;
      std::int64_t tmp = old_r - t * r;
      old_r = r;
      r = tmp;
      tmp = old_s - t * s;
      old_s = s;
      s = tmp;
    }
    inv_p = ((old_s % q) + q) % q;
  }
  std::int64_t p_prime = q == 1 ? 0 : inv_p - q;
  if (p_prime <= -q) p_prime += q;
  std::int64_t q_prime = (1 - p * p_prime) / q;
  if (p * p_prime + q * q_prime != 1) throw InvariantViolation("dual_slope: identity failed");
  return {p_prime, q_prime};
}

CfPartials cf_partials(const std::vector<std::int64_t>& a) {
  CfPartials out;
  out.c.push_back({1, 1});
  for (std::size_t l = 0; l < a.size(); ++l) {
    RationalValue b = l == 0 ? RationalValue{a[0], 1} : sub({a[l], 1}, inv(out.b.back()));
    out.b.push_back(b);
    out.c.push_back(mul(out.c.back(), b));
  }
  return out;
}

RationalValue evaluate_neg_cf(const std::vector<std::int64_t>& a) {
  if (a.empty()) throw DomainError("evaluate_neg_cf: empty expansion");
  return cf_partials(a).b.back();
}

RationalValue cf_reciprocal_sum(const CfPartials& partials) {
  RationalValue sum{0, 1};
  const std::size_t z = partials.b.size();
  for (std::size_t j = 1; j < z; ++j) {
    sum = add(sum, inv(mul(partials.c[j], partials.c[j - 1])));
  }
  return sum;
}

int SurgeryPresentation::zeta_total() const {
  int z = 0;
  for (const auto& f : filled) z += static_cast<int>(f.cf.size());
  return z;
}

bool SurgeryPresentation::is_filled(int component) const { return filled_index(component) >= 0; }

int SurgeryPresentation::filled_index(int component) const {
  for (std::size_t k = 0; k < filled.size(); ++k)
    if (filled[k].component == component) return static_cast<int>(k);
  return -1;
}

SurgeryPresentation make_surgery(const FslPresentation& p, const std::vector<int>& filled_components,
                                 const std::vector<std::pair<std::int64_t, std::int64_t>>& slopes) {
  if (filled_components.size() != slopes.size()) {
    throw DomainError("make_surgery: one slope per filled component is required");
  }
  SurgeryPresentation s;
  for (std::size_t k = 0; k < filled_components.size(); ++k) {
    int c = filled_components[k];
    if (c < 1 || c > p.n) {
      throw DomainError("make_surgery: filled component " + std::to_string(c) + " not in 1.." +
                        std::to_string(p.n));
    }
    if (s.is_filled(c - 1)) throw DomainError("make_surgery: component " + std::to_string(c) + " listed twice");
    auto [pp, qq] = slopes[k];
    FilledComponent f;
    f.component = c - 1;
    f.p = pp;
    f.q = qq;
    f.cf = neg_cf(pp, qq);
    f.partials = cf_partials(f.cf);
    f.dual = dual_slope(pp, qq);
    const std::size_t z = f.cf.size();
    if (!(evaluate_neg_cf(f.cf) == RationalValue{pp, qq})) {
      throw InvariantViolation("make_surgery: expansion does not reproduce " + slope_text(pp, qq));
    }
    RationalValue cz = f.partials.c[z - 1];
    if (!(cz == RationalValue{qq, 1} || cz == RationalValue{-qq, 1})) {
      throw InvariantViolation("make_surgery: |c_{z-1}| != q for " + slope_text(pp, qq));
    }
    if (!(cf_reciprocal_sum(f.partials) == make_rational(-f.dual.p_prime, qq))) {
      throw InvariantViolation("make_surgery: reciprocal sum identity failed for " + slope_text(pp, qq));
    }
    s.filled.push_back(std::move(f));
  }
  return s;
}

std::vector<int> unfilled_components(const FslPresentation& p, const SurgeryPresentation& s) {
  std::vector<int> out;
  for (int i = 0; i < p.n; ++i)
    if (!s.is_filled(i)) out.push_back(i);
  return out;
}

LogComplex signature_phase(int r, int sigma) {
  // exp(i pi sigma (3/r + (r+1)/4)); the (r+1)/4 part is reduced mod 2 exactly.
  long long k = (static_cast<long long>(sigma) * (r + 1)) % 8;
  if (k < 0) k += 8;
  double phase = kPi * (static_cast<double>(k) / 4.0 + 3.0 * sigma / static_cast<double>(r));
  return {0.0, phase};
}

std::vector<LogComplex> chain_factors(const RootContext& ctx, const FilledComponent& f, int n_color) {
  const int K = (ctx.r() - 1) / 2;
  const std::size_t z = f.cf.size();
  auto link = [&](int a, int b) { return qdiff(ctx, static_cast<long long>(a + 1) * (b + 1)); };
  // v[m/2]: partial sums over m_1..m_l with m_l = m.
  std::vector<cplx> v(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) v[static_cast<std::size_t>(k)] = link(n_color, 2 * k);
  for (std::size_t l = 1; l < z; ++l) {
    // v currently ends at m_l (1-based l) without its framing factor.
    for (int k = 0; k < K; ++k)
      v[static_cast<std::size_t>(k)] *= component_phase(ctx, static_cast<int>(f.cf[l - 1]), 0, 2 * k).value();
    std::vector<cplx> w(static_cast<std::size_t>(K));
    for (int k2 = 0; k2 < K; ++k2) {
      cplx sum = 0.0, comp = 0.0;
      for (int k = 0; k < K; ++k) {
        cplx t = v[static_cast<std::size_t>(k)] * link(2 * k, 2 * k2);
        cplx y = t - comp;
        cplx s2 = sum + y;
        comp = (s2 - sum) - y;
        sum = s2;
      }
      w[static_cast<std::size_t>(k2)] = sum;
    }
    v = std::move(w);
  }
  std::vector<LogComplex> out(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) out[static_cast<std::size_t>(k)] = LogComplex::from_complex(v[static_cast<std::size_t>(k)]);
  return out;
}

FilledResult rt_filled(const RootContext& ctx, const FslPresentation& p, const SurgeryPresentation& s,
                       const std::vector<int>& nI, const std::vector<int>& mJ,
                       const FilledOptions& options) {
  require_valid(p);
  const int r = ctx.r();
  const auto unfilled = unfilled_components(p, s);
  const int nF = static_cast<int>(s.filled.size());
  if (static_cast<int>(nI.size()) != nF || mJ.size() != unfilled.size()) {
    throw DomainError("rt_filled: expected " + std::to_string(nF) + " filled and " +
                      std::to_string(unfilled.size()) + " unfilled colors");
  }
  for (int v : nI)
    if (v < 0 || v > r - 3 || v % 2) throw DomainError("rt_filled: color " + std::to_string(v) + " is not even in [0, r-3]");
  for (int v : mJ)
    if (v < 0 || v > r - 3 || v % 2) throw DomainError("rt_filled: color " + std::to_string(v) + " is not even in [0, r-3]");

  FilledResult result;
  for (std::size_t k = 0; k < s.filled.size(); ++k) {
    if (s.filled[k].q % 2 == 0) {
      result.warnings.push_back({"EvenDenominator", "surgery.slopes[" + std::to_string(k) + "]",
                                 "q = " + std::to_string(s.filled[k].q) +
                                     " is even; the asymptotic formula assumes odd q"});
    }
  }
  const LogComplex sig = signature_phase(r, p.signature_hint);
  if (nF == 0) {
    result.value = rt_fsl(ctx, p, Coloring{mJ}) * sig;
    return result;
  }

  const int zeta = s.zeta_total();
  LogComplex pref((zeta - p.c) * std::log(ctx.mu_r()), 0.0);
  pref /= LogComplex::from_complex(qdiff(ctx, 1)).pow(zeta);
  pref *= sig;
  for (int f = 0; f < nF; ++f)
    pref *= component_phase(ctx, p.framing[static_cast<std::size_t>(s.filled[static_cast<std::size_t>(f)].component)], 0,
                            nI[static_cast<std::size_t>(f)]);
  for (std::size_t j = 0; j < unfilled.size(); ++j) {
    auto c = static_cast<std::size_t>(unfilled[j]);
    pref *= component_phase(ctx, p.framing[c], p.iota[c], mJ[j]);
  }

  const int K = (r - 1) / 2;
  // Per filled component: chain factor times the framing phase of m_z.
  std::vector<std::vector<LogComplex>> weight(static_cast<std::size_t>(nF));
  for (int f = 0; f < nF; ++f) {
    const auto& fc = s.filled[static_cast<std::size_t>(f)];
    auto ch = chain_factors(ctx, fc, nI[static_cast<std::size_t>(f)]);
    for (int k = 0; k < K; ++k)
      ch[static_cast<std::size_t>(k)] *= component_phase(ctx, static_cast<int>(fc.cf.back()),
                                                         p.iota[static_cast<std::size_t>(fc.component)], 2 * k);
    weight[static_cast<std::size_t>(f)] = std::move(ch);
  }

  // Per block: the filled components it touches and a 6j table over their colors.
  std::vector<int> colors(static_cast<std::size_t>(p.n), 0);
  for (std::size_t j = 0; j < unfilled.size(); ++j) colors[static_cast<std::size_t>(unfilled[j])] = mJ[j];
  std::vector<std::vector<int>> deps(static_cast<std::size_t>(p.c));
  std::vector<std::vector<LogComplex>> table(static_cast<std::size_t>(p.c));
  for (int b = 0; b < p.c; ++b) {
    auto& d = deps[static_cast<std::size_t>(b)];
    for (int f = 0; f < nF; ++f)
      if (slot_multiplicity(p, b, s.filled[static_cast<std::size_t>(f)].component) > 0) d.push_back(f);
    double size = std::pow(static_cast<double>(K), static_cast<double>(d.size()));
    if (size > static_cast<double>(1 << 24)) {
      throw DomainError("rt_filled: block " + std::to_string(b + 1) + " needs a 6j table of " +
                        std::to_string(size) + " entries");
    }
    auto& t = table[static_cast<std::size_t>(b)];
    t.resize(static_cast<std::size_t>(size));
    auto local = colors;
    for (std::size_t idx = 0; idx < t.size(); ++idx) {
      std::size_t rest = idx;
      for (int f : d) {
        local[static_cast<std::size_t>(s.filled[static_cast<std::size_t>(f)].component)] =
            2 * static_cast<int>(rest % static_cast<std::size_t>(K));
        rest /= static_cast<std::size_t>(K);
      }
      t[idx] = sixj_lenient(ctx, block_colors(p, b, local));
    }
  }

  // Sum over the leading index in parallel; every partial has a fixed shape.
  std::size_t inner = 1;
  for (int f = 1; f < nF; ++f) inner *= static_cast<std::size_t>(K);
  std::vector<LogComplex> partial(static_cast<std::size_t>(K));
  auto work = [&](int lead) {
    std::vector<LogComplex> terms;
    terms.reserve(inner);
    std::vector<int> k(static_cast<std::size_t>(nF));
    k[0] = lead;
    for (std::size_t idx = 0; idx < inner; ++idx) {
      std::size_t rest = idx;
      for (int f = 1; f < nF; ++f) {
        k[static_cast<std::size_t>(f)] = static_cast<int>(rest % static_cast<std::size_t>(K));
        rest /= static_cast<std::size_t>(K);
      }
      LogComplex term = LogComplex::one();
      for (int f = 0; f < nF; ++f) term *= weight[static_cast<std::size_t>(f)][static_cast<std::size_t>(k[static_cast<std::size_t>(f)])];
      for (int b = 0; b < p.c && !term.is_zero(); ++b) {
        std::size_t ti = 0, stride = 1;
        for (int f : deps[static_cast<std::size_t>(b)]) {
          ti += stride * static_cast<std::size_t>(k[static_cast<std::size_t>(f)]);
          stride *= static_cast<std::size_t>(K);
        }
        const LogComplex& sj = table[static_cast<std::size_t>(b)][ti];
        term = sj.is_zero() ? LogComplex::zero() : term * sj;
      }
      if (!term.is_zero()) terms.push_back(term);
    }
    partial[static_cast<std::size_t>(lead)] = log_sum(terms, ctx.precision());
  };
  const int nt = std::max(1, std::min(options.threads, K));
  std::vector<std::thread> pool;
  for (int w = 0; w < nt; ++w) {
    pool.emplace_back([&, w] {
      for (int lead = w; lead < K; lead += nt) work(lead);
    });
  }
  for (auto& t : pool) t.join();

  result.value = pref * tree_reduce(partial, ctx.precision());
  return result;
}

}  // namespace shadowrt
