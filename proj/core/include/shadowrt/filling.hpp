#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "shadowrt/fsl_model.hpp"
#include "shadowrt/qarith.hpp"
#include "shadowrt/sixj.hpp"

namespace shadowrt {

// p/q = a_z - 1/(a_{z-1} - 1/(... - 1/a_1)); returned as (a_1, ..., a_z).
std::vector<std::int64_t> neg_cf(std::int64_t p, std::int64_t q);

struct DualSlope {
  std::int64_t p_prime = 0;
  std::int64_t q_prime = 0;
};

// The (p', q') with p p' + q q' = 1 and -q < p' <= 0.
DualSlope dual_slope(std::int64_t p, std::int64_t q);

struct RationalValue {
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool operator==(const RationalValue&) const = default;
};

// b_l = a_l - 1/b_{l-1} (b_1 = a_1) and c_l = b_1 ... b_l (c_0 = 1).
struct CfPartials {
  std::vector<RationalValue> b;  // b[l-1] = b_l, l = 1..z
  std::vector<RationalValue> c;  // c[l] = c_l, l = 0..z
};

CfPartials cf_partials(const std::vector<std::int64_t>& a);
RationalValue evaluate_neg_cf(const std::vector<std::int64_t>& a);
// sum_{j=1}^{z-1} 1/(c_j c_{j-1}) in exact arithmetic.
RationalValue cf_reciprocal_sum(const CfPartials& partials);

struct FilledComponent {
  int component = 0;  // 0-based index into the presentation
  std::int64_t p = 0;
  std::int64_t q = 1;
  std::vector<std::int64_t> cf;  // a_1..a_z
  CfPartials partials;
  DualSlope dual;
};

struct SurgeryPresentation {
  std::vector<FilledComponent> filled;

  int zeta_total() const;
  bool is_filled(int component) const;
  // Position of the component within `filled`, or -1.
  int filled_index(int component) const;
};

// Builds the derived data and checks coprimality, q >= 1, |p/q| > 1 and the
// exact identities (round trip of the expansion, c_{z-1} = q, the dual
// slope identity). Components are 1-based as in the JSON schema.
SurgeryPresentation make_surgery(const FslPresentation& p,
                                 const std::vector<int>& filled_components,
                                 const std::vector<std::pair<std::int64_t, std::int64_t>>& slopes);

// Components not in I, ascending, 0-based.
std::vector<int> unfilled_components(const FslPresentation& p, const SurgeryPresentation& s);

struct FilledOptions {
  int threads = 1;
};

struct FilledResult {
  LogComplex value;
  std::vector<Finding> warnings;
};

// exp(-sigma (-3/r - (r+1)/4) i pi).
LogComplex signature_phase(int r, int sigma);

// Relative invariant of the filled pair. nI follows s.filled order; mJ follows
// unfilled_components order.
FilledResult rt_filled(const RootContext& ctx, const FslPresentation& p, const SurgeryPresentation& s,
                       const std::vector<int>& nI, const std::vector<int>& mJ,
                       const FilledOptions& options = {});

// The chain factor sum over m_1..m_{z-1} for one filled component, returned
// for every even m_z in {0,...,r-3} (index m_z/2).
std::vector<LogComplex> chain_factors(const RootContext& ctx, const FilledComponent& f, int n_color);

}  // namespace shadowrt
