#include "shadowrt/fsl_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shadowrt/errors.hpp"

namespace shadowrt {

std::vector<Finding> validate(const FslPresentation& p) {
  std::vector<Finding> out;
  if (p.c < 1) out.push_back({"NonPositive", "c", "c must be at least 1"});
  if (p.n < 1) out.push_back({"NonPositive", "n", "n must be at least 1"});
  if (static_cast<int>(p.incidence.size()) != p.c) {
    out.push_back({"SlotCount", "incidence",
                   "expected " + std::to_string(p.c) + " rows of 6 slots, got " +
                       std::to_string(p.incidence.size())});
  }
  if (static_cast<int>(p.iota.size()) != p.n) {
    out.push_back({"SizeMismatch", "iota", "expected " + std::to_string(p.n) + " entries"});
  }
  if (static_cast<int>(p.framing.size()) != p.n) {
    out.push_back({"SizeMismatch", "framing", "expected " + std::to_string(p.n) + " entries"});
  }
  std::vector<int> used(static_cast<std::size_t>(std::max(p.n, 0)), 0);
  for (std::size_t s = 0; s < p.incidence.size(); ++s) {
    for (std::size_t k = 0; k < 6; ++k) {
      int i = p.incidence[s][k];
      if (i < 1 || i > p.n) {
        out.push_back({"IndexOutOfRange",
                       "incidence[" + std::to_string(s) + "][" + std::to_string(k) + "]",
                       "component " + std::to_string(i) + " not in 1.." + std::to_string(p.n)});
      } else {
        ++used[static_cast<std::size_t>(i - 1)];
      }
    }
  }
  for (int i = 0; i < p.n; ++i) {
    if (used[static_cast<std::size_t>(i)] == 0) {
      out.push_back({"UnusedComponent", "incidence",
                     "component " + std::to_string(i + 1) + " is never referenced"});
    }
  }
  return out;
}

void require_valid(const FslPresentation& p) {
  auto f = validate(p);
  if (!f.empty()) throw PresentationError(f.front().code + " at " + f.front().path + ": " + f.front().message);
}

SixTuple block_colors(const FslPresentation& p, int s, const std::vector<int>& component_colors) {
  SixTuple t;
  const auto& inc = p.incidence[static_cast<std::size_t>(s)];
  for (std::size_t k = 0; k < 6; ++k) t.m[k] = component_colors[static_cast<std::size_t>(inc[k] - 1)];
  return t;
}

int slot_multiplicity(const FslPresentation& p, int s, int i) {
  int n = 0;
  for (int c : p.incidence[static_cast<std::size_t>(s)]) n += (c - 1 == i);
  return n;
}

LogComplex component_phase(const RootContext& ctx, int framing, int iota, int m) {
  // m = 2k: (a0 + iota/2) m(m+2)/2 = (2 a0 + iota) k(k+1), an integer.
  const long long k = m / 2;
  const long long r = ctx.r();
  long long e = ((2LL * framing + iota) % r) * ((k * (k + 1)) % r) % r;
  if (e < 0) e += r;
  double phase = kTwoPi * static_cast<double>(e) / static_cast<double>(r);
  if ((iota * k) % 2 != 0) phase += kPi;
  return {0.0, phase};
}

LogComplex rt_fsl(const RootContext& ctx, const FslPresentation& p, const Coloring& m) {
  require_valid(p);
  if (static_cast<int>(m.m.size()) != p.n) {
    throw DomainError("rt_fsl: expected " + std::to_string(p.n) + " colors");
  }
  for (int v : m.m) {
    if (v < 0 || v > ctx.r() - 3 || v % 2 != 0) {
      throw DomainError("rt_fsl: color " + std::to_string(v) + " is not even in [0, r-3]");
    }
  }
  LogComplex out = LogComplex(-p.c * std::log(ctx.mu_r()), 0.0);
  for (int i = 0; i < p.n; ++i) {
    auto ui = static_cast<std::size_t>(i);
    out *= component_phase(ctx, p.framing[ui], p.iota[ui], m.m[ui]);
  }
  for (int s = 0; s < p.c; ++s) {
    LogComplex v = sixj_lenient(ctx, block_colors(p, s, m.m));
    if (v.is_zero()) return LogComplex::zero();
    out *= v;
  }
  return out;
}

}  // namespace shadowrt
