#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "shadowrt/filling.hpp"
#include "shadowrt/fsl_model.hpp"
#include "shadowrt/qarith.hpp"

namespace shadowrt {

// Dense row-major complex matrix, enough for Hessians and Jacobians of a few
// dozen variables.
struct CMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<cplx> data;

  CMatrix() = default;
  CMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r * c)) {}
  cplx& operator()(int i, int j) { return data[static_cast<std::size_t>(i * cols + j)]; }
  const cplx& operator()(int i, int j) const { return data[static_cast<std::size_t>(i * cols + j)]; }
};

cplx determinant(const CMatrix& m);
std::vector<cplx> solve(const CMatrix& a, const std::vector<cplx>& b);

struct DihedralAngles {
  std::array<cplx, 6> alpha{};

  static DihedralAngles all(cplx a);
  cplx tau(int i) const;  // i in 1..4, vertex half-sums
  cplx eta(int j) const;  // j in 1..3, square half-sums
};

// Real slice check: max Re tau - tol <= Re xi <= min(Re eta, 2 pi) + tol.
bool in_admissible_region(const DihedralAngles& a, cplx xi, double tol = 1e-9);

// Potential of one truncated tetrahedron. `check_domain` enforces the
// admissible-region precondition.
cplx potential_u(const DihedralAngles& a, cplx xi, bool check_domain = true);
cplx potential_u_dxi(const DihedralAngles& a, cplx xi);
cplx potential_u_dxi2(const DihedralAngles& a, cplx xi);
std::array<cplx, 6> potential_u_dalpha(const DihedralAngles& a, cplx xi);

// Im U / 2 on the real slice, written with the Lobachevsky function.
double potential_v(const std::array<double, 6>& alpha, double xi);

struct XiSolve {
  cplx xi;
  double residual = 0.0;
  int iterations = 0;
};

// Root of dU/dxi = 0 near the initial guess (Newton, secant fallback).
XiSolve solve_xi(const DihedralAngles& a, cplx guess = 1.75 * kPi, double tol = 1e-12,
                 int max_iter = 50);
cplx xi_of_alpha(const DihedralAngles& a);

struct GramMatrix {
  std::array<std::array<cplx, 4>, 4> entries{};
  cplx det;
};

GramMatrix gram_matrix(const std::array<cplx, 6>& z);
// Principal 3x3 minors of the Gram matrix at z = i*theta, one per vertex
// triple (1,2,3), (1,5,6), (2,4,6), (3,4,5). Negative at hyperideal vertices.
std::array<double, 4> gram_vertex_minors(const std::array<double, 6>& theta);
// Angles in [0, pi) whose sum at every vertex triple is below pi.
bool is_hyperideal_angles(const std::array<double, 6>& theta, double tol = 1e-9);

// Volume of the truncated tetrahedron built from cone angles theta, i.e. with
// dihedral angles theta/2: V(alpha, xi(alpha)) at alpha = pi - theta/2.
double truncated_tet_volume(const std::array<double, 6>& theta);

struct PotentialEval {
  cplx value;
  std::vector<cplx> gradient;
  CMatrix hessian;
};

// Potential of a filled presentation. Variables: one alpha per filled
// component (in SurgeryPresentation order) followed by one xi per block.
class FillingSystem {
 public:
  FillingSystem(FslPresentation p, SurgeryPresentation s, std::vector<int> E,
                std::vector<double> beta_I, std::vector<double> alpha_J);

  int dim() const { return nI_ + p_.c; }
  int filled_count() const { return nI_; }
  const FslPresentation& presentation() const { return p_; }
  const SurgeryPresentation& surgery() const { return s_; }
  const std::vector<int>& E() const { return E_; }
  const std::vector<double>& beta_I() const { return beta_I_; }
  const std::vector<double>& alpha_J() const { return alpha_J_; }

  // Angle of every component for given filled-component angles.
  std::vector<cplx> component_alphas(const std::vector<cplx>& alpha_filled) const;
  DihedralAngles block_angles(const std::vector<cplx>& comp_alpha, int s) const;

  std::vector<cplx> initial_point() const;
  cplx value(const std::vector<cplx>& x) const;
  std::vector<cplx> gradient(const std::vector<cplx>& x) const;
  CMatrix hessian(const std::vector<cplx>& x, double step = 1e-5) const;
  PotentialEval evaluate(const std::vector<cplx>& x) const;

  // d/d alpha_k of sum_s U_s(alpha, xi_s) - sum (iota/2)(alpha - pi)^2,
  // per component, at fixed xi.
  std::vector<cplx> component_derivatives(const std::vector<cplx>& comp_alpha,
                                          const std::vector<cplx>& xi) const;

 private:
  FslPresentation p_;
  SurgeryPresentation s_;
  std::vector<int> E_;
  std::vector<double> beta_I_;
  std::vector<double> alpha_J_;
  std::vector<int> unfilled_;
  int nI_ = 0;
};

PotentialEval system_potential(const FslPresentation& p, const SurgeryPresentation& s,
                               const std::vector<int>& E, const std::vector<double>& beta_I,
                               const std::vector<double>& alpha_J, const std::vector<cplx>& x);

struct SolverOptions {
  double angle_gate = 0.3;  // |beta - pi|, |alpha_J - pi| bound
  bool force = false;
  double tolerance = 1e-12;
  int max_iterations = 100;
};

struct GeometricSolution {
  std::vector<cplx> alpha_star;   // per filled component
  std::vector<cplx> xi_star;      // per block
  cplx critical_value;
  double vol = 0.0;
  double cs = 0.0;      // representative in [0, pi^2)
  double cs_raw = 0.0;  // -Re(critical_value - 2 c pi^2)
  std::vector<cplx> H_u, H_v, H_gamma;  // per component
  std::vector<cplx> lengths;            // per component; real part is the geodesic length
  std::vector<double> theta;            // cone angles per component
  CMatrix hessian;
  std::vector<int> E;    // per filled component
  std::vector<int> mu;   // per component
  std::vector<double> beta_I, alpha_J;
  bool converged = false;
  double residual = 0.0;
  double filling_residual = 0.0;  // max_i |p H(u) + q H(v) - i theta|
  int iterations = 0;
};

GeometricSolution find_critical_point(const FslPresentation& p, const SurgeryPresentation& s,
                                      const std::vector<int>& E, const std::vector<double>& beta_I,
                                      const std::vector<double>& alpha_J,
                                      const SolverOptions& options = {});

// Per-component lengths at a solution: l_k = -i eps_k sum over the slots of
// dU/d alpha, with eps = E mu on filled and -mu on unfilled components.
std::vector<cplx> edge_lengths(const FslPresentation& p, const SurgeryPresentation& s,
                               const GeometricSolution& sol);

struct TorsionReport {
  cplx torsion;      // system (p u + q v on filled, u on unfilled)
  cplx torsion_u;    // meridian system, 2^{3c} prod sqrt det G_s
  std::vector<cplx> sqrt_det_gram;  // per block, branch equal to 4i at the complete structure
  CMatrix jacobian;  // d H(Upsilon_i) / d H(u_k), i,k filled
  cplx jacobian_det;
  // Hessian/Jacobian identity: -(prod q) det Hess = -(-2)^{|I|} det J prod U_xixi.
  cplx hessian_identity_lhs, hessian_identity_rhs;
  // Per-block Gram identity at the critical point.
  std::vector<cplx> gram_identity_lhs, gram_identity_rhs;
};

TorsionReport torsion(const FslPresentation& p, const SurgeryPresentation& s,
                      const GeometricSolution& sol, double step = 1e-4);

}  // namespace shadowrt
