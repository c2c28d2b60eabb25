#include "shadowrt/asympt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "shadowrt/errors.hpp"

namespace shadowrt {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

long long mod(long long a, long long m) {
  long long v = a % m;
  return v < 0 ? v + m : v;
}

}  // namespace

std::vector<double> unwrap_phases(const std::vector<LogComplex>& values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) {
    double a = v.arg();
    if (!out.empty()) {
      double d = a - out.back();
      d -= kTwoPi * std::floor((d + kPi) / kTwoPi);
      if (d <= -kPi) d += kTwoPi;
      a = out.back() + d;
    }
    out.push_back(a);
  }
  return out;
}

GrowthFit growth_fit(const std::vector<std::pair<int, LogComplex>>& points) {
  if (points.size() < 3) throw DomainError("growth_fit: need at least 3 points");
  const auto n = static_cast<Eigen::Index>(points.size());
  std::vector<LogComplex> values;
  values.reserve(points.size());
  for (const auto& [r, v] : points) {
    if (v.is_zero()) throw DomainError("growth_fit: zero value at r = " + std::to_string(r));
    values.push_back(v);
  }
  auto phase = unwrap_phases(values);

  Eigen::MatrixXd a_re(n, 3), a_im(n, 2);
  Eigen::VectorXd b_re(n), b_im(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double r = points[static_cast<std::size_t>(i)].first;
    a_re(i, 0) = r / (4.0 * kPi);
    a_re(i, 1) = std::log(r);
    a_re(i, 2) = 1.0;
    a_im(i, 0) = r / (4.0 * kPi);
    a_im(i, 1) = 1.0;
    b_re(i) = values[static_cast<std::size_t>(i)].log_mag();
    b_im(i) = phase[static_cast<std::size_t>(i)];
  }
  Eigen::VectorXd x_re = a_re.colPivHouseholderQr().solve(b_re);
  Eigen::VectorXd x_im = a_im.colPivHouseholderQr().solve(b_im);

  GrowthFit fit;
  fit.vol = x_re(0);
  fit.power = x_re(1);
  fit.cs = x_im(0);
  fit.constant = cplx(x_re(2), x_im(1));
  double ss = (a_re * x_re - b_re).squaredNorm() + (a_im * x_im - b_im).squaredNorm();
  fit.residual = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

std::vector<double> aitken(const std::vector<double>& x) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 2 < x.size(); ++i) {
    double d1 = x[i + 1] - x[i];
    double d2 = x[i + 2] - 2.0 * x[i + 1] + x[i];
    if (d2 == 0.0 || !std::isfinite(d2)) {
      out.push_back(x[i + 2]);
    } else {
      out.push_back(x[i] - d1 * d1 / d2);
    }
  }
  return out;
}

double cs_distance_mod(double a, double b, double period) {
  double d = std::fmod(a - b, period);
  if (d > period / 2.0) d -= period;
  if (d <= -period / 2.0) d += period;
  return d;
}

PredictedTerm predicted_leading(const RootContext& ctx, const FslPresentation& p,
                                const SurgeryPresentation& s, const GeometricSolution& sol,
                                const TorsionReport& t) {
  if (!sol.converged) throw SolverError("predicted_leading: solution did not converge");
  const int r = ctx.r();
  const int c = p.c;
  const int n_filled = static_cast<int>(s.filled.size());
  const int zeta = s.zeta_total();
  const auto unfilled = unfilled_components(p, s);

  // Integer data of the surgery: sum of all chain coefficients, and the
  // exponent of the r-linear phase in Z_r.
  long long chain_sum = 0;
  long long phase_count = 2LL * zeta;
  for (const auto& f : s.filled) {
    long long a_sum = std::accumulate(f.cf.begin(), f.cf.end(), 0LL);
    chain_sum += a_sum;
    phase_count += p.framing[static_cast<std::size_t>(f.component)] + a_sum;
  }
  for (int j : unfilled) phase_count += p.framing[static_cast<std::size_t>(j)];

  // Z_r.
  const int k = zeta - c;
  const double sin1 = std::sin(kTwoPi / r);
  LogComplex z_r((zeta - 2 * c) * std::log(2.0) + k * (std::log(sin1) - 0.5 * std::log(r)), 0.0);
  if (chain_sum % 2 != 0) z_r = -z_r;
  z_r /= LogComplex::from_complex(qdiff(ctx, 1)).pow(k);
  z_r = z_r.rotated(-kPi / 4.0 * static_cast<double>(mod(r * phase_count, 8)));
  z_r *= signature_phase(r, p.signature_hint);

  // C_1, including the 2^{|I|} from the sum over orientation signs.
  double framing_sum = 0.0;
  for (int i = 0; i < p.n; ++i) {
    framing_sum += p.framing[static_cast<std::size_t>(i)] + 0.5 * p.iota[static_cast<std::size_t>(i)];
  }
  LogComplex c1(c * std::log(2.0) + (0.5 * zeta - 0.5 * c) * std::log(r), 0.0);
  c1 = c1.rotated(-kPi / 2.0 * static_cast<double>(mod(static_cast<long long>(r) * c, 4)));
  c1 = c1.rotated(kPi * ((n_filled + c) / 4.0 + framing_sum));

  cplx gamma_sum = 0.0;
  for (int i = 0; i < p.n; ++i) {
    gamma_sum += 0.5 * static_cast<double>(sol.mu[static_cast<std::size_t>(i)]) *
                 sol.H_gamma[static_cast<std::size_t>(i)];
  }
  LogComplex holonomy(gamma_sum.real(), gamma_sum.imag());
  LogComplex inv_sqrt_t = LogComplex::from_complex(t.torsion).pow(-0.5);

  PredictedTerm out;
  out.exponent = cplx(0.0, -1.0) * (sol.critical_value - 2.0 * c * kPi * kPi);
  out.prefactor = z_r * c1 * holonomy * inv_sqrt_t;
  const double scale = r / (4.0 * kPi);
  out.value = out.prefactor * LogComplex(scale * out.exponent.real(), scale * out.exponent.imag());
  return out;
}

int realize_color(int r, double theta, int mu) {
  const double alpha = kPi + mu * theta / 2.0;
  const double target = r * alpha / kTwoPi;
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int m = 0; m <= r - 3; m += 2) {
    double d = std::abs(m - target);
    if (d < best_d - 1e-12) {
      best = m;
      best_d = d;
    }
  }
  return best;
}

namespace {

VerifyPoint verify_one(const FslPresentation& p, const SurgeryPresentation& s,
                       const std::vector<int>& unfilled, const AngleSpec& angles, int r,
                       const VerifyOptions& options) {
  VerifyPoint pt;
  pt.r = r;
  pt.colors.resize(static_cast<std::size_t>(p.n));
  for (int i = 0; i < p.n; ++i) {
    auto ui = static_cast<std::size_t>(i);
    int mu = angles.mu.empty() ? 1 : angles.mu[ui];
    pt.colors[ui] = realize_color(r, angles.theta[ui], mu);
  }
  try {
    RootContext ctx(r, options.precision);
    std::vector<int> n_i, m_j;
    std::vector<double> beta, alpha;
    for (const auto& f : s.filled) {
      int m = pt.colors[static_cast<std::size_t>(f.component)];
      n_i.push_back(m);
      beta.push_back(kTwoPi * m / r);
    }
    for (int j : unfilled) {
      int m = pt.colors[static_cast<std::size_t>(j)];
      m_j.push_back(m);
      alpha.push_back(kTwoPi * m / r);
    }
    pt.rt = rt_filled(ctx, p, s, n_i, m_j).value;
    std::vector<int> e(s.filled.size(), 1);
    auto sol = find_critical_point(p, s, e, beta, alpha, options.solver);
    auto tor = torsion(p, s, sol);
    auto pred = predicted_leading(ctx, p, s, sol, tor);
    pt.predicted = pred.value;
    pt.predicted_vol = sol.vol;
    pt.predicted_cs = sol.cs;
    pt.torsion = tor.torsion;
    pt.ok = !pt.rt.is_zero();
    if (!pt.ok) pt.failure = "ZeroInvariant: RT_r vanished";
  } catch (const Error& e) {
    pt.failure = e.code() + ": " + e.what();
  }
  return pt;
}

}  // namespace

AsymptoticReport verify(const FslPresentation& p, const SurgeryPresentation& s,
                        const AngleSpec& angles, const std::vector<int>& r_values,
                        const VerifyOptions& options) {
  require_valid(p);
  if (static_cast<int>(angles.theta.size()) != p.n ||
      (!angles.mu.empty() && static_cast<int>(angles.mu.size()) != p.n)) {
    throw DomainError("verify: angle spec must list one entry per component");
  }
  for (std::size_t i = 0; i < r_values.size(); ++i) {
    if (r_values[i] < 5 || r_values[i] % 2 == 0) {
      throw DomainError("verify: r = " + std::to_string(r_values[i]) + " is not an odd integer >= 5");
    }
    if (i > 0 && r_values[i] <= r_values[i - 1]) {
      throw DomainError("verify: r values must be strictly increasing");
    }
  }

  AsymptoticReport rep;
  for (const auto& f : s.filled) {
    if (f.q % 2 == 0) {
      rep.warnings.push_back({"EvenDenominator", "slopes[" + std::to_string(f.component + 1) + "]",
                              "q = " + std::to_string(f.q) +
                                  " is even; the asymptotic statement assumes odd q"});
    }
  }

  const auto unfilled = unfilled_components(p, s);
  std::vector<VerifyPoint> pts(r_values.size());
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(r_values.size())));
  auto work = [&](int w) {
    for (std::size_t i = static_cast<std::size_t>(w); i < r_values.size();
         i += static_cast<std::size_t>(threads)) {
      pts[i] = verify_one(p, s, unfilled, angles, r_values[i], options);
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }

  std::vector<std::pair<int, LogComplex>> series;
  std::vector<double> scaled;
  for (const auto& pt : pts) {
    if (!pt.ok) continue;
    rep.r_values.push_back(pt.r);
    rep.rt_values.push_back(pt.rt);
    series.emplace_back(pt.r, pt.rt);
    scaled.push_back(4.0 * kPi / pt.r * pt.rt.log_mag());
    rep.prefactor_ratio.push_back((pt.rt / pt.predicted).value());
    rep.predicted_vol = pt.predicted_vol;
    rep.predicted_cs = pt.predicted_cs;
    rep.predicted_torsion = pt.torsion;
  }
  rep.points = std::move(pts);
  if (series.size() >= 3) {
    auto fit = growth_fit(series);
    rep.fitted_vol = fit.vol;
    rep.fitted_cs = fit.cs;
    rep.fitted_power = fit.power;
    auto acc = aitken(scaled);
    rep.accelerated_vol = acc.back();
  } else {
    rep.fitted_vol = std::numeric_limits<double>::quiet_NaN();
    rep.fitted_cs = std::numeric_limits<double>::quiet_NaN();
    rep.fitted_power = std::numeric_limits<double>::quiet_NaN();
    rep.accelerated_vol = std::numeric_limits<double>::quiet_NaN();
  }
  rep.raw_scaled_vol = scaled.empty() ? std::numeric_limits<double>::quiet_NaN() : scaled.back();
  return rep;
}

std::string report_csv(const AsymptoticReport& report) {
  std::ostringstream os;
  os << "r,log_mag,phase,fitted_running_vol,predicted_vol,ratio_mag,ratio_phase\n";
  std::vector<std::pair<int, LogComplex>> prefix;
  for (const auto& pt : report.points) {
    if (!pt.ok) {
      os << pt.r << ",nan,nan,nan,nan,nan,nan\n";
      continue;
    }
    prefix.emplace_back(pt.r, pt.rt);
    double running = std::numeric_limits<double>::quiet_NaN();
    if (prefix.size() >= 3) running = growth_fit(prefix).vol;
    LogComplex ratio = pt.rt / pt.predicted;
    os << pt.r << ',' << fmt(pt.rt.log_mag()) << ',' << fmt(pt.rt.arg()) << ',' << fmt(running)
       << ',' << fmt(pt.predicted_vol) << ',' << fmt(std::exp(ratio.log_mag())) << ','
       << fmt(ratio.arg()) << '\n';
  }
  return os.str();
}

}  // namespace shadowrt
