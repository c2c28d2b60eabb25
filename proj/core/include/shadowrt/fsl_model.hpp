#pragma once

#include <array>
#include <string>
#include <vector>

#include "shadowrt/qarith.hpp"
#include "shadowrt/sixj.hpp"

namespace shadowrt {

// c tetrahedral building blocks whose six edge slots are labelled by link
// components 1..n. Slot order follows SixTuple: vertex triples (1,2,3),
// (1,5,6), (2,4,6), (3,4,5).
struct FslPresentation {
  int c = 0;
  int n = 0;
  std::vector<std::array<int, 6>> incidence;  // 1-based component per slot
  std::vector<int> iota;                      // one per component
  std::vector<int> framing;                   // a_0 per component
  int signature_hint = 0;
};

struct Finding {
  std::string code;
  std::string path;
  std::string message;
};

std::vector<Finding> validate(const FslPresentation& p);
// Throws PresentationError carrying the first finding.
void require_valid(const FslPresentation& p);

// Colors of block s (0-based) given one color per component.
SixTuple block_colors(const FslPresentation& p, int s, const std::vector<int>& component_colors);

// Number of edge slots of block s occupied by component i (both 0-based).
int slot_multiplicity(const FslPresentation& p, int s, int i);

struct Coloring {
  std::vector<int> m;
};

// Invariant of the unfilled pair:
// mu_r^{-c} prod_i (-1)^{iota_i m_i/2} q^{(a_0^i + iota_i/2) m_i(m_i+2)/2} prod_s 6j_s.
LogComplex rt_fsl(const RootContext& ctx, const FslPresentation& p, const Coloring& m);

// The framing/mutation phase of one component with color m.
LogComplex component_phase(const RootContext& ctx, int framing, int iota, int m);

}  // namespace shadowrt
