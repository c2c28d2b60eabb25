#pragma once

#include <array>
#include <cstdint>
#include <list>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "shadowrt/qarith.hpp"
#include "shadowrt/specfun.hpp"

namespace shadowrt {

// Colors on the six edges of a tetrahedron. Vertex triples are (1,2,3),
// (1,5,6), (2,4,6), (3,4,5); the three "squares" are the complements of the
// pairs of opposite edges (3,6), (2,5), (1,4).
struct SixTuple {
  std::array<int, 6> m{};

  int T(int i) const;  // i in 1..4
  int Q(int j) const;  // j in 1..3
  int sum() const { return m[0] + m[1] + m[2] + m[3] + m[4] + m[5]; }
  bool operator==(const SixTuple&) const = default;
};

inline constexpr std::array<std::array<int, 3>, 4> kVertexTriples{{
    {0, 1, 2}, {0, 4, 5}, {1, 3, 5}, {2, 3, 4}}};
inline constexpr std::array<std::array<int, 4>, 3> kSquares{{
    {0, 1, 3, 4}, {0, 2, 3, 5}, {1, 2, 4, 5}}};

bool is_admissible_triple(int r, int m1, int m2, int m3);
bool is_admissible(int r, const SixTuple& t);

// Delta(m1,m2,m3) = sqrt([T-m1]![T-m2]![T-m3]!/[T+1]!), T = (m1+m2+m3)/2,
// with sqrt(x) = i sqrt(|x|) for negative x.
LogComplex delta(const RootContext& ctx, int m1, int m2, int m3);

// Definitional sum. Throws DomainError on an inadmissible tuple.
LogComplex sixj(const RootContext& ctx, const SixTuple& t);
// Zero for inadmissible tuples.
LogComplex sixj_lenient(const RootContext& ctx, const SixTuple& t);

// The 24 images of t under the symmetry group of the tetrahedron.
std::array<SixTuple, 24> tetrahedral_orbit(const SixTuple& t);
SixTuple orbit_representative(const SixTuple& t);

// Bounded LRU memo keyed by (r, precision, orbit representative).
class SixjCache {
 public:
  explicit SixjCache(std::size_t capacity = std::size_t{1} << 20);
  LogComplex get(const RootContext& ctx, const SixTuple& t);  // lenient
  std::size_t size() const;
  std::size_t hits() const;
  std::size_t misses() const;

 private:
  struct Key {
    int r;
    int precision;
    std::array<int, 6> m;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  using Entry = std::pair<Key, LogComplex>;

  std::size_t capacity_;
  mutable std::mutex mu_;
  std::list<Entry> order_;
  std::unordered_map<Key, std::list<Entry>::iterator, KeyHash> index_;
  std::size_t hits_ = 0, misses_ = 0;
};

// Angles |pi - 2 pi m_i / r| of a coloring.
std::array<double, 6> coloring_angles(int r, const SixTuple& t);
bool is_hyperideal_coloring(int r, const SixTuple& t);

// The exponent U_r(2 pi m/r, 2 pi k/r) of the dilogarithm representation.
cplx potential_ur(const PhiGrid& phi, const SixTuple& t, int k);

struct UrEvaluation {
  LogComplex value;
  bool fallback = false;  // tuple not of hyperideal type; value from sixj()
};

UrEvaluation sixj_via_ur(const PhiGrid& phi, const SixTuple& t);
UrEvaluation sixj_via_ur(const RootContext& ctx, const ContourSpec& contour, const SixTuple& t);

struct GrowthPoint {
  int r = 0;
  SixTuple colors;
  double scaled_log = 0.0;  // (2 pi / r) log|6j|
};

struct GrowthSeries {
  std::vector<GrowthPoint> points;
  std::vector<int> skipped;  // r values with no admissible coloring
  bool hyperideal_targets = true;
};

// Even color in {0,...,r-3} whose angle |pi - 2 pi m/r| is closest to theta;
// ties go to the smaller color.
int color_for_angle(int r, double theta);

GrowthSeries sixj_growth(const std::vector<int>& r_values, const std::array<double, 6>& theta,
                         int threads = 1, Precision precision = Precision::standard);

}  // namespace shadowrt
