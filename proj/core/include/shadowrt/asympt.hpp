#pragma once

#include <string>
#include <utility>
#include <vector>

#include "shadowrt/filling.hpp"
#include "shadowrt/fsl_model.hpp"
#include "shadowrt/geometry.hpp"
#include "shadowrt/qarith.hpp"

namespace shadowrt {

struct GrowthFit {
  double vol = 0.0;
  double cs = 0.0;     // slope of the unwrapped phase times 4 pi
  double power = 0.0;  // exponent of r in the prefactor
  cplx constant;       // log of the r-independent factor
  double residual = 0.0;
};

// Least squares for log RT_r ~ (vol + i cs) r/(4 pi) + power log r + constant.
// The real part uses (r/(4 pi), log r, 1); the phase, unwrapped along the
// sequence, uses (r/(4 pi), 1). Needs at least 3 points.
GrowthFit growth_fit(const std::vector<std::pair<int, LogComplex>>& points);

// Phases of the sequence made continuous (consecutive jumps in (-pi, pi]).
std::vector<double> unwrap_phases(const std::vector<LogComplex>& values);

// Aitken delta-squared transform; returns x.size() - 2 entries. Falls back to
// the last input when the second difference vanishes.
std::vector<double> aitken(const std::vector<double>& x);

// CS difference reduced into (-pi^2/4, pi^2/4].
double cs_distance_mod(double a, double b, double period = kPi * kPi / 2.0);

struct PredictedTerm {
  LogComplex value;
  LogComplex prefactor;   // Z_r C_1 e^{sum mu H(gamma)/2} / sqrt(T)
  cplx exponent;          // (vol + i cs), cs taken from the critical value
};

// Z_r C_1 e^{(1/2) sum mu_k H(gamma_k)} / sqrt(T) e^{(r/4pi)(vol + i cs)}.
// The sign of T and the branch of its square root only affect the phase.
PredictedTerm predicted_leading(const RootContext& ctx, const FslPresentation& p,
                                const SurgeryPresentation& s, const GeometricSolution& sol,
                                const TorsionReport& t);

// Target cone angle and orientation sign per component (0-based, all n).
struct AngleSpec {
  std::vector<double> theta;
  std::vector<int> mu;  // +1 puts the angle above pi; empty means all +1
};

// Nearest even color in [0, r-3] to r alpha/(2 pi), alpha = pi + mu theta/2.
// Ties go to the smaller color.
int realize_color(int r, double theta, int mu);

struct VerifyOptions {
  int threads = 1;
  Precision precision = Precision::standard;
  SolverOptions solver;
};

struct VerifyPoint {
  int r = 0;
  std::vector<int> colors;  // per component
  LogComplex rt;
  LogComplex predicted;
  double predicted_vol = 0.0;
  double predicted_cs = 0.0;
  cplx torsion;
  bool ok = false;
  std::string failure;
};

struct AsymptoticReport {
  std::vector<int> r_values;
  std::vector<LogComplex> rt_values;
  std::vector<VerifyPoint> points;  // one per requested r, including failures
  double fitted_vol = 0.0;
  double fitted_cs = 0.0;
  bool cs_ambiguous = true;  // cs only meaningful mod pi^2/2
  double fitted_power = 0.0;
  double accelerated_vol = 0.0;  // Aitken on (4 pi / r) log|RT|, last entry
  double raw_scaled_vol = 0.0;   // (4 pi / r) log|RT| at the largest r
  double predicted_vol = 0.0;    // at the largest r
  double predicted_cs = 0.0;
  cplx predicted_torsion;
  std::vector<cplx> prefactor_ratio;  // RT / predicted
  std::vector<Finding> warnings;
};

AsymptoticReport verify(const FslPresentation& p, const SurgeryPresentation& s,
                        const AngleSpec& angles, const std::vector<int>& r_values,
                        const VerifyOptions& options = {});

// Columns: r, log_mag, phase, fitted_running_vol, predicted_vol, ratio_mag,
// ratio_phase. Numbers use 17 significant digits.
std::string report_csv(const AsymptoticReport& report);

}  // namespace shadowrt
