#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "shadowrt/qarith.hpp"

namespace shadowrt {

// Integration contour for the quantum dilogarithm: the real axis with
// (-epsilon, epsilon) replaced by the upper half circle of radius epsilon.
struct ContourSpec {
  double epsilon = 0.5;
  double truncation = 0.0;  // 0 selects an adaptive cutoff (always >= 20)
  int nodes = 64;           // Gauss-Legendre points per panel, doubled until stable

  void validate() const;
};

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

// Shared, lazily built n-point rule.
const GaussLegendreRule& gauss_legendre(int n);

// Principal dilogarithm -int_0^z log(1-u)/u du, cut on (1, inf). A point on
// the cut is accepted only when the imaginary part is a negative zero, which
// selects the limit from below; otherwise it raises DomainError.
cplx li2(cplx z);

// Clausen function Cl2(x) = sum sin(kx)/k^2.
double clausen2(double x);

// Lobachevsky function -int_0^theta log|2 sin t| dt.
double lobachevsky(double theta);

// Faddeev-type quantum dilogarithm at level r, holomorphic on
// -pi/r < Re z < pi + pi/r and continued meromorphically outside.
cplx phi_r(const RootContext& ctx, const ContourSpec& contour, cplx z);

// True when z lies within tol of a pole of phi_r.
bool phi_r_near_pole(const RootContext& ctx, cplx z, double tol = 1e-6);

// Memoized phi_r(j*pi/r) for integer j. Internally synchronized.
class PhiGrid {
 public:
  PhiGrid(const RootContext& ctx, ContourSpec contour = {});
  cplx at(int j) const;
  const RootContext& context() const { return ctx_; }

 private:
  RootContext ctx_;
  ContourSpec contour_;
  mutable std::mutex mu_;
  mutable std::map<int, cplx> cache_;
};

}  // namespace shadowrt
