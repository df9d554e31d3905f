#pragma once

// Hand-rolled generators for the property tests.

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "epilab/epilab.hpp"
#include "oracle.hpp"

namespace gen {

using epilab::ClosedSet;
using epilab::ExtReal;
using epilab::GridPtr;
using epilab::LscFunction;

class Source {
 public:
  explicit Source(std::uint64_t seed) : eng_(seed) {}

  double uniform(double a = 0.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(eng_); }
  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_); }
  bool coin(double p = 0.5) { return uniform() < p; }

 private:
  std::mt19937_64 eng_;
};

/// Small 1-d or 2-d grid with a coarse ordinate lattice.
inline GridPtr small_grid(Source& s) {
  const double h = s.coin() ? 0.5 : 0.25;
  const double half = h * static_cast<double>(2 + s.below(4));
  const double hv = s.coin() ? 0.5 : 0.25;
  auto spec = s.coin(0.7) ? oracle::small_line(-half, half, h, -2, 2, hv) : oracle::small_plane(-half, half, h, -2, 2, hv);
  return epilab::make_grid(spec);
}

inline ClosedSet set(Source& s, const GridPtr& g, double density = -1.0) {
  const double p = density < 0 ? s.uniform(0.0, 0.5) : density;
  std::vector<ClosedSet::index_type> m;
  for (std::size_t i = 0; i < g->size(); ++i) {
    if (s.coin(p)) m.push_back(static_cast<ClosedSet::index_type>(i));
  }
  return ClosedSet::from_sorted(g, std::move(m));
}

inline std::vector<ClosedSet> sequence(Source& s, const GridPtr& g, std::size_t len) {
  std::vector<ClosedSet> out;
  for (std::size_t n = 0; n < len; ++n) out.push_back(set(s, g, s.uniform(0.0, 0.3)));
  return out;
}

inline ExtReal value(Source& s) {
  const double u = s.uniform();
  if (u < 0.05) return ExtReal::pos_inf();
  if (u < 0.08) return ExtReal::neg_inf();
  return ExtReal(s.uniform(-3.0, 3.0));
}

inline LscFunction function(Source& s, const GridPtr& g) {
  std::vector<ExtReal> v;
  for (std::size_t i = 0; i < g->size(); ++i) v.push_back(value(s));
  return LscFunction(g, std::move(v));
}

/// Radius that is a multiple of `step` (often a lattice distance) or a
/// generic real.
inline double radius(Source& s, double step, std::size_t max_steps) {
  if (s.coin()) return step * static_cast<double>(s.below(max_steps + 1));
  return s.uniform(0.0, step * static_cast<double>(max_steps));
}

}  // namespace gen
