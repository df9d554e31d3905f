#pragma once

// Brute-force reference implementations. They touch only the raw lattice
// coordinates and plain containers, never the library's set algebra.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "epilab/epilab.hpp"

namespace oracle {

using epilab::Grid;
using epilab::GridPtr;

inline constexpr double kEps = 1e-9;

inline double euclid(const Grid& g, std::size_t i, std::size_t j) {
  const auto a = g.coords(i);
  const auto b = g.coords(j);
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

inline double euclid_to(const Grid& g, std::size_t i, const std::array<double, 2>& c) {
  const auto a = g.coords(i);
  return std::hypot(a[0] - c[0], a[1] - c[1]);
}

inline std::set<std::size_t> ball(const Grid& g, const std::array<double, 2>& c, double r, bool strict = false) {
  std::set<std::size_t> out;
  if (r < 0) return out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = euclid_to(g, i, c);
    if (strict ? d < r - kEps : d <= r + kEps) out.insert(i);
  }
  return out;
}

template <class Set>
std::set<std::size_t> as_set(const Set& s) {
  return {s.members().begin(), s.members().end()};
}

inline bool hits(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  for (auto i : a) {
    if (b.count(i)) return true;
  }
  return false;
}

inline double dist_to_set(const Grid& g, std::size_t i, const std::set<std::size_t>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (auto j : b) best = std::min(best, euclid(g, i, j));
  return best;
}

inline double excess(const Grid& g, const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  if (a.empty()) return 0.0;
  if (b.empty()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (auto i : a) worst = std::max(worst, dist_to_set(g, i, b));
  return worst;
}

inline double product_euclid(const Grid& g, std::size_t p, std::size_t q) {
  const std::size_t nv = g.ordinate_count();
  return std::max(euclid(g, p / nv, q / nv), std::abs(g.ordinate(p % nv) - g.ordinate(q % nv)));
}

inline double product_excess(const Grid& g, const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  if (a.empty()) return 0.0;
  if (b.empty()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (auto p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (auto q : b) best = std::min(best, product_euclid(g, p, q));
    worst = std::max(worst, best);
  }
  return worst;
}

/// Points within tol of some tail element.
inline std::set<std::size_t> outer(const Grid& g, const std::vector<std::set<std::size_t>>& seq, std::size_t tail,
                                   double tol) {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t n = tail; n < seq.size(); ++n) {
      if (dist_to_set(g, i, seq[n]) <= tol + kEps) {
        out.insert(i);
        break;
      }
    }
  }
  return out;
}

/// Points within tol of every tail element.
inline std::set<std::size_t> inner(const Grid& g, const std::vector<std::set<std::size_t>>& seq, std::size_t tail,
                                   double tol) {
  std::set<std::size_t> out;
  if (tail >= seq.size()) return out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    bool all = true;
    for (std::size_t n = tail; n < seq.size() && all; ++n) all = dist_to_set(g, i, seq[n]) <= tol + kEps;
    if (all) out.insert(i);
  }
  return out;
}

inline double value(const epilab::ExtReal& v) {
  if (v.is_pos_inf()) return std::numeric_limits<double>::infinity();
  if (v.is_neg_inf()) return -std::numeric_limits<double>::infinity();
  return v.value();
}

inline double inf_over(const epilab::LscFunction& f, const std::set<std::size_t>& a) {
  double best = std::numeric_limits<double>::infinity();
  for (auto i : a) best = std::min(best, value(f[i]));
  return best;
}

/// (x_i, a_k) lies in the window-clipped epigraph.
inline bool in_epigraph(const epilab::LscFunction& f, std::size_t i, std::size_t k) {
  const Grid& g = *f.grid();
  const double v = value(f[i]);
  const double a = g.ordinate(k);
  if (v == -std::numeric_limits<double>::infinity()) return true;
  if (v == std::numeric_limits<double>::infinity()) return false;
  return a >= std::max(v, g.spec().value_lo) - kEps;
}

/// Scans the whole product lattice for a point of the epigraph within
/// max-metric distance r of (x, alpha).
inline bool epi_hits_ball(const epilab::LscFunction& f, std::size_t x, double r, double alpha, bool strict = false) {
  const Grid& g = *f.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double dx = euclid(g, i, x);
    for (std::size_t k = 0; k < g.ordinate_count(); ++k) {
      const double d = std::max(dx, std::abs(g.ordinate(k) - alpha));
      const bool inside = strict ? d < r - kEps : d <= r + kEps;
      if (inside && in_epigraph(f, i, k)) return true;
    }
  }
  return false;
}

inline std::set<std::size_t> eps_argmin(const epilab::LscFunction& f, double eps) {
  const Grid& g = *f.grid();
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) m = std::min(m, value(f[i]));
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = value(f[i]);
    if (m == std::numeric_limits<double>::infinity()) {
      out.insert(i);
    } else if (m == -std::numeric_limits<double>::infinity()) {
      if (v == m) out.insert(i);
    } else if (v <= m + eps + 1e-12 * std::max(1.0, std::abs(m))) {
      out.insert(i);
    }
  }
  return out;
}

inline epilab::GridSpec small_line(double lo, double hi, double h, double vlo = -1, double vhi = 1, double hv = 0.5) {
  epilab::GridSpec s;
  s.dim = 1;
  s.lo = {lo, lo};
  s.hi = {hi, hi};
  s.h = h;
  s.value_lo = vlo;
  s.value_hi = vhi;
  s.h_v = hv;
  return s;
}

inline epilab::GridSpec small_plane(double lo, double hi, double h, double vlo = -1, double vhi = 1, double hv = 0.5) {
  auto s = small_line(lo, hi, h, vlo, vhi, hv);
  s.dim = 2;
  return s;
}

}  // namespace oracle
