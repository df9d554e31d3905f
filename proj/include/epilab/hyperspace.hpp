#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "epilab/carrier.hpp"
#include "epilab/closed_set.hpp"

namespace epilab {

/// Marker value returned by excess when a nonempty set is compared to ∅.
inline constexpr double kInfiniteExcess = std::numeric_limits<double>::infinity();

/// F ∩ A ≠ ∅.
template <class Space>
bool hits(const BasicClosedSet<Space>& F, const BasicClosedSet<Space>& A) {
  require_same_grid(F.grid(), A.grid(), "hits");
  const auto f = F.members();
  const auto a = A.members();
  if (f.empty() || a.empty()) return false;
  const auto& small = f.size() <= a.size() ? f : a;
  const auto& large = f.size() <= a.size() ? a : f;
  // Binary search the larger side when the sizes are very unbalanced.
  if (small.size() * 24 < large.size()) {
    for (auto i : small) {
      if (std::binary_search(large.begin(), large.end(), i)) return true;
    }
    return false;
  }
  auto p = f.begin();
  auto q = a.begin();
  while (p != f.end() && q != a.end()) {
    if (*p == *q) return true;
    if (*p < *q) {
      ++p;
    } else {
      ++q;
    }
  }
  return false;
}

template <class Space>
bool hits(const BasicClosedSet<Space>& F, const SetMask<Space>& A) {
  for (auto i : F.members()) {
    if (A.test(i)) return true;
  }
  return false;
}

/// F ∩ A = ∅.
template <class Space>
bool misses(const BasicClosedSet<Space>& F, const BasicClosedSet<Space>& A) {
  return !hits(F, A);
}

/// sup_{x ∈ F} dist(x, G) together with a point attaining it.
struct ExcessResult {
  double value = 0.0;
  std::optional<std::size_t> witness;
};

namespace detail {

/// Visits every cell at Chebyshev index distance exactly k from `center`.
template <class Fn>
void for_each_in_shell(const LatticeShape& s, const std::array<std::size_t, 3>& center, long long k, Fn&& fn) {
  std::array<long long, 3> lo{0, 0, 0};
  std::array<long long, 3> hi{0, 0, 0};
  for (int a = 0; a < s.rank; ++a) {
    lo[a] = std::max(0LL, static_cast<long long>(center[a]) - k);
    hi[a] = std::min(static_cast<long long>(s.extent[a]) - 1, static_cast<long long>(center[a]) + k);
  }
  std::array<long long, 3> delta{0, 0, 0};
  std::array<std::size_t, 3> cell{0, 0, 0};
  // Pin axis `a` to ±k; axes before `a` stay strictly inside the shell so
  // no cell is visited twice.
  for (int a = 0; a < s.rank; ++a) {
    for (long long side : {-k, k}) {
      const long long pinned = static_cast<long long>(center[a]) + side;
      if (pinned < 0 || pinned >= static_cast<long long>(s.extent[a])) continue;
      if (k == 0 && side > 0) continue;
      std::array<long long, 3> from = lo;
      std::array<long long, 3> to = hi;
      for (int b = 0; b < a; ++b) {
        from[b] = std::max(from[b], static_cast<long long>(center[b]) - k + 1);
        to[b] = std::min(to[b], static_cast<long long>(center[b]) + k - 1);
      }
      from[a] = to[a] = pinned;
      bool empty = false;
      for (int b = 0; b < s.rank; ++b) empty = empty || from[b] > to[b];
      if (empty) continue;
      for (long long i0 = from[0]; i0 <= to[0]; ++i0) {
        for (long long i1 = s.rank > 1 ? from[1] : 0; i1 <= (s.rank > 1 ? to[1] : 0); ++i1) {
          for (long long i2 = s.rank > 2 ? from[2] : 0; i2 <= (s.rank > 2 ? to[2] : 0); ++i2) {
            cell = {static_cast<std::size_t>(i0), static_cast<std::size_t>(i1), static_cast<std::size_t>(i2)};
            delta = {i0 - static_cast<long long>(center[0]), i1 - static_cast<long long>(center[1]),
                     i2 - static_cast<long long>(center[2])};
            fn(s.flatten(cell), delta);
          }
        }
      }
    }
  }
}

/// Distance from cell x to the nonempty target described by `mask`.
/// Small targets are scanned directly; otherwise shells of growing index
/// radius are searched until no closer cell can exist.
inline double nearest_distance(const LatticeShape& s, std::span<const std::uint8_t> mask,
                               std::span<const std::uint32_t> small_members, std::size_t x) {
  if (mask[x]) return 0.0;
  if (!small_members.empty()) {
    double best = std::numeric_limits<double>::infinity();
    for (auto m : small_members) best = std::min(best, s.distance(x, m));
    return best;
  }
  const auto center = s.unflatten(x);
  long long max_k = 0;
  for (int a = 0; a < s.rank; ++a) max_k = std::max(max_k, static_cast<long long>(s.extent[a]));
  double best = std::numeric_limits<double>::infinity();
  const double step = s.min_spacing();
  for (long long k = 1; k <= max_k; ++k) {
    if (best <= static_cast<double>(k) * step) break;
    for_each_in_shell(s, center, k, [&](std::size_t cell, const std::array<long long, 3>& delta) {
      if (mask[cell]) best = std::min(best, s.metric(delta));
    });
  }
  return best;
}

inline constexpr std::size_t kBruteForceTarget = 256;

inline std::vector<std::uint8_t> dilate(const LatticeShape& s, std::span<const std::uint8_t> mask, double tol);

/// Sorted distinct values the metric takes between cells of `s`, when the
/// base is one-dimensional.
inline std::vector<double> line_product_distances(const LatticeShape& s) {
  std::vector<double> v;
  v.reserve(s.extent[0] + s.extent[1]);
  for (std::size_t i = 0; i < s.extent[0]; ++i) v.push_back(s.metric({static_cast<long long>(i), 0, 0}));
  for (std::size_t k = 0; k < s.extent[1]; ++k) v.push_back(s.metric({0, static_cast<long long>(k), 0}));
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// Excess over a large target on an E x R lattice with one-dimensional E:
/// the smallest metric value t whose dilation of `to` covers `from`.
inline ExcessResult excess_by_threshold(const LatticeShape& s, std::span<const std::uint8_t> from,
                                        std::span<const std::uint8_t> to) {
  const auto cand = line_product_distances(s);
  auto covered = [&](double t) {
    const auto d = dilate(s, to, t);
    for (std::size_t i = 0; i < from.size(); ++i) {
      if (from[i] && !d[i]) return false;
    }
    return true;
  };
  std::size_t lo = 0;
  std::size_t hi = cand.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (covered(cand[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  ExcessResult r;
  if (lo == 0) {
    for (std::size_t i = 0; i < from.size(); ++i) {
      if (from[i]) {
        r.witness = i;
        break;
      }
    }
    return r;
  }
  const auto below = dilate(s, to, cand[lo - 1]);
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (from[i] && !below[i]) {
      r.witness = i;
      break;
    }
  }
  r.value = nearest_distance(s, to, {}, *r.witness);
  return r;
}

/// Excess of the set given by `from` over the target `to` (both masks).
inline ExcessResult excess_masks(const LatticeShape& s, std::span<const std::uint8_t> from,
                                 std::span<const std::uint8_t> to) {
  ExcessResult r;
  std::size_t to_count = 0;
  bool from_empty = true;
  for (std::size_t i = 0; i < to.size(); ++i) to_count += to[i] != 0;
  for (std::size_t i = 0; i < from.size() && from_empty; ++i) from_empty = from[i] == 0;
  if (from_empty) return r;
  if (to_count == 0) {
    r.value = kInfiniteExcess;
    for (std::size_t i = 0; i < from.size(); ++i) {
      if (from[i]) {
        r.witness = i;
        break;
      }
    }
    return r;
  }
  if (s.product && s.base_rank == 1 && to_count > kBruteForceTarget) return excess_by_threshold(s, from, to);
  std::vector<std::uint32_t> small;
  if (to_count <= kBruteForceTarget) {
    for (std::size_t i = 0; i < to.size(); ++i) {
      if (to[i]) small.push_back(static_cast<std::uint32_t>(i));
    }
  }
  r.value = -1.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (!from[i] || to[i]) continue;
    const double d = nearest_distance(s, to, small, i);
    if (d > r.value) {
      r.value = d;
      r.witness = i;
    }
  }
  if (r.value < 0.0) {
    // from ⊆ to: excess 0, witnessed by any member.
    r.value = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
      if (from[i]) {
        r.witness = i;
        break;
      }
    }
  }
  return r;
}

/// Dilation by `tol`: every cell within metric distance tol of a marked cell.
inline std::vector<std::uint8_t> dilate(const LatticeShape& s, std::span<const std::uint8_t> mask, double tol) {
  std::vector<std::uint8_t> work(mask.begin(), mask.end());
  const std::size_t n = s.size();
  std::size_t block = 1;
  if (s.product) {
    // The product metric is max(base, ordinate), so the ordinate axis can be
    // dilated on its own first: one forward and one backward sweep per column.
    const int oa = s.base_rank;
    const std::size_t nv = s.extent[oa];
    block = nv;
    const auto kv = static_cast<long long>(std::floor(tol / s.spacing[oa] + 1e-7));
    std::vector<std::uint8_t> col(nv);
    for (std::size_t start = 0; start < n; start += nv) {
      long long last = -(1LL << 40);
      for (std::size_t k = 0; k < nv; ++k) {
        if (mask[start + k]) last = static_cast<long long>(k);
        col[k] = static_cast<long long>(k) - last <= kv;
      }
      last = 1LL << 40;
      for (std::size_t k = nv; k-- > 0;) {
        if (mask[start + k]) last = static_cast<long long>(k);
        work[start + k] = col[k] || last - static_cast<long long>(k) <= kv;
      }
    }
  }
  const std::size_t e0 = s.extent[0];
  std::vector<std::uint8_t> out(n, 0);
  if (s.base_rank == 1) {
    // Sliding window along the base axis via running counts.
    const auto r0 = static_cast<long long>(std::floor(tol / s.spacing[0] + 1e-7));
    std::vector<std::uint32_t> prefix((e0 + 1) * block, 0);
    for (std::size_t i0 = 0; i0 < e0; ++i0) {
      for (std::size_t k = 0; k < block; ++k) {
        prefix[(i0 + 1) * block + k] = prefix[i0 * block + k] + work[i0 * block + k];
      }
    }
    for (std::size_t i0 = 0; i0 < e0; ++i0) {
      const auto lo = static_cast<std::size_t>(std::max(0LL, static_cast<long long>(i0) - r0));
      const auto hi = static_cast<std::size_t>(
          std::min(static_cast<long long>(e0) - 1, static_cast<long long>(i0) + r0));
      for (std::size_t k = 0; k < block; ++k) {
        out[i0 * block + k] = prefix[(hi + 1) * block + k] != prefix[lo * block + k];
      }
    }
    return out;
  }
  // Base stencil: index offsets whose euclidean length is <= tol.
  const std::size_t e1 = s.extent[1];
  const auto r0 = static_cast<long long>(std::floor(tol / s.spacing[0] + 1e-7));
  const auto r1 = static_cast<long long>(std::floor(tol / s.spacing[1] + 1e-7));
  for (long long d0 = -r0; d0 <= r0; ++d0) {
    for (long long d1 = -r1; d1 <= r1; ++d1) {
      const double len = std::hypot(static_cast<double>(d0) * s.spacing[0], static_cast<double>(d1) * s.spacing[1]);
      if (len > tol + kSlack) continue;
      for (std::size_t i0 = 0; i0 < e0; ++i0) {
        const long long j0 = static_cast<long long>(i0) + d0;
        if (j0 < 0 || j0 >= static_cast<long long>(e0)) continue;
        for (std::size_t i1 = 0; i1 < e1; ++i1) {
          const long long j1 = static_cast<long long>(i1) + d1;
          if (j1 < 0 || j1 >= static_cast<long long>(e1)) continue;
          const std::size_t dst = (i0 * e1 + i1) * block;
          const std::size_t src = (static_cast<std::size_t>(j0) * e1 + static_cast<std::size_t>(j1)) * block;
          std::uint8_t* o = out.data() + dst;
          const std::uint8_t* w = work.data() + src;
          for (std::size_t k = 0; k < block; ++k) o[k] |= w[k];
        }
      }
    }
  }
  return out;
}

/// Streaming accumulator for the finite-window outer and inner limits of a
/// set sequence: outer = cells within tol of some tail set, inner = cells
/// within tol of every tail set. Also keeps the plain union of the tail.
class TailLimits {
 public:
  TailLimits(LatticeShape shape, double tol)
      : shape_(shape), tol_(tol), outer_(shape.size(), 0), inner_(shape.size(), 1), raw_(shape.size(), 0) {}

  void add(std::span<const std::uint8_t> set_mask) {
    const auto d = dilate(shape_, set_mask, tol_);
    for (std::size_t i = 0; i < d.size(); ++i) {
      outer_[i] |= d[i];
      inner_[i] &= d[i];
      raw_[i] |= set_mask[i];
    }
    ++count_;
  }

  std::size_t count() const noexcept { return count_; }
  const std::vector<std::uint8_t>& outer() const noexcept { return outer_; }
  const std::vector<std::uint8_t>& inner() const noexcept { return inner_; }
  const std::vector<std::uint8_t>& tail_union() const noexcept { return raw_; }

 private:
  LatticeShape shape_;
  double tol_;
  std::vector<std::uint8_t> outer_;
  std::vector<std::uint8_t> inner_;
  std::vector<std::uint8_t> raw_;
  std::size_t count_ = 0;
};

template <class Space>
void check_tail_args(std::span<const BasicClosedSet<Space>> seq, std::size_t tail_start, double tol) {
  if (seq.empty()) throw usage_error("set limit: empty sequence");
  if (tail_start >= seq.size()) throw usage_error("set limit: tail_start beyond the sequence");
  const LatticeShape s = seq.front().shape();
  if (tol + kSlack < s.min_spacing()) throw usage_error("set limit: tol below lattice resolution");
  for (const auto& F : seq) require_same_grid(seq.front().grid(), F.grid(), "set limit");
}

template <class Space>
TailLimits tail_limits(std::span<const BasicClosedSet<Space>> seq, std::size_t tail_start, double tol) {
  check_tail_args(seq, tail_start, tol);
  TailLimits acc(seq.front().shape(), tol);
  for (std::size_t n = tail_start; n < seq.size(); ++n) acc.add(seq[n].mask());
  return acc;
}

}  // namespace detail

template <class Space>
ExcessResult excess_with_witness(const BasicClosedSet<Space>& F, const BasicClosedSet<Space>& G) {
  require_same_grid(F.grid(), G.grid(), "excess");
  if (F.empty()) return {};
  if (G.empty()) return {kInfiniteExcess, F.members().front()};
  return detail::excess_masks(F.shape(), F.mask(), G.mask());
}

/// sup_{x ∈ F} dist(x, G); 0 for F = ∅, kInfiniteExcess for F ≠ ∅ = G.
template <class Space>
double excess(const BasicClosedSet<Space>& F, const BasicClosedSet<Space>& G) {
  return excess_with_witness(F, G).value;
}

/// Outer limit over the tail window: lattice points within tol of some
/// tail set. Empty tail sets contribute nothing.
template <class Space>
BasicClosedSet<Space> pk_limsup(std::span<const BasicClosedSet<Space>> seq, std::size_t tail_start, double tol) {
  auto acc = detail::tail_limits(seq, tail_start, tol);
  return BasicClosedSet<Space>::from_mask(seq.front().grid(), acc.outer());
}

/// Inner limit over the tail window: lattice points within tol of every
/// tail set (∅ as soon as one tail set is empty).
template <class Space>
BasicClosedSet<Space> pk_liminf(std::span<const BasicClosedSet<Space>> seq, std::size_t tail_start, double tol) {
  auto acc = detail::tail_limits(seq, tail_start, tol);
  return BasicClosedSet<Space>::from_mask(seq.front().grid(), acc.inner());
}

/// Outcome of a finite-window set convergence check. Witnesses are lattice
/// indices of the space the sets live in.
struct SetConvergence {
  bool converged = false;
  double tol = 0.0;
  std::size_t tail_start = 0;
  std::size_t tail_length = 0;
  double upper_excess = 0.0;  // sup over tail members of dist(., F)
  std::optional<std::size_t> upper_witness;
  double lower_excess = 0.0;  // excess(F, inner limit)
  std::optional<std::size_t> lower_witness;
  double outer_excess = 0.0;  // excess(outer limit, F), dilation included
  bool upper_ok = false;
  bool lower_ok = true;
  std::size_t outer_size = 0;
  std::size_t inner_size = 0;
};

namespace detail {

inline SetConvergence assess(const LatticeShape& s, const TailLimits& acc, std::span<const std::uint8_t> target,
                             double tol, std::size_t tail_start, bool two_sided) {
  SetConvergence c;
  c.tol = tol;
  c.tail_start = tail_start;
  c.tail_length = acc.count();
  for (auto v : acc.outer()) c.outer_size += v;
  for (auto v : acc.inner()) c.inner_size += v;
  // Upper side: every tail set must lie within tol of F. The dilated outer
  // limit would overstate this by up to tol, so the raw tail union is used.
  const auto up = excess_masks(s, acc.tail_union(), target);
  c.upper_excess = up.value;
  c.upper_witness = up.witness;
  c.upper_ok = up.value <= tol + kSlack;
  c.outer_excess = excess_masks(s, acc.outer(), target).value;
  if (two_sided) {
    const auto low = excess_masks(s, target, acc.inner());
    c.lower_excess = low.value;
    c.lower_witness = low.witness;
    c.lower_ok = low.value <= tol + kSlack;
  }
  c.converged = c.upper_ok && c.lower_ok;
  return c;
}

}  // namespace detail

/// Upper-Fell convergence of the tail toward F: the outer limit must sit
/// inside F up to tol. Witness = worst offending point when it fails.
template <class Space>
SetConvergence upper_fell_converges(std::span<const BasicClosedSet<Space>> seq, const BasicClosedSet<Space>& F,
                                    std::size_t tail_start, double tol) {
  auto acc = detail::tail_limits(seq, tail_start, tol);
  require_same_grid(seq.front().grid(), F.grid(), "upper_fell_converges");
  return detail::assess(F.shape(), acc, F.mask(), tol, tail_start, false);
}

/// Fell (= Painlevé–Kuratowski) convergence: the upper check plus
/// F ⊆ inner limit up to tol.
template <class Space>
SetConvergence fell_converges(std::span<const BasicClosedSet<Space>> seq, const BasicClosedSet<Space>& F,
                              std::size_t tail_start, double tol) {
  auto acc = detail::tail_limits(seq, tail_start, tol);
  require_same_grid(seq.front().grid(), F.grid(), "fell_converges");
  return detail::assess(F.shape(), acc, F.mask(), tol, tail_start, true);
}

/// A ball given by real center coordinates (which must be lattice points)
/// and a radius.
struct Ball {
  std::array<double, 2> center{0.0, 0.0};
  double radius = 0.0;
};

/// Basic open set of the hit-or-miss topology: sets missing every closed
/// ball in `missing` and hitting every open ball in `hitting`.
struct BaseElement {
  std::vector<Ball> missing;
  std::vector<Ball> hitting;
};

inline Point ball_center(const GridPtr& grid, const Ball& b) {
  std::vector<double> x(b.center.begin(), b.center.begin() + grid->dim());
  if (!grid->on_lattice(x)) throw usage_error("ball: center is not a lattice point");
  return Point(grid, grid->nearest(x));
}

inline bool in_base_element(const ClosedSet& F, const BaseElement& B) {
  if (B.missing.empty()) throw usage_error("base element: needs at least one missing ball");
  for (const auto& b : B.missing) {
    if (!(b.radius > 0.0)) throw usage_error("base element: radii must be positive");
  }
  for (const auto& b : B.hitting) {
    if (!(b.radius > 0.0)) throw usage_error("base element: radii must be positive");
  }
  for (const auto& b : B.missing) {
    if (hits(F, closed_ball(ball_center(F.grid(), b), b.radius))) return false;
  }
  for (const auto& b : B.hitting) {
    if (misses(F, open_ball(ball_center(F.grid(), b), b.radius))) return false;
  }
  return true;
}

}  // namespace epilab
