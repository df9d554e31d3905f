#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "epilab/carrier.hpp"
#include "epilab/closed_set.hpp"
#include "epilab/format.hpp"
#include "epilab/hyperspace.hpp"

namespace epilab {

/// Element of the extended real line: a finite double, +inf or -inf.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  ExtReal(double v) : v_(v) {  // NOLINT(google-explicit-constructor)
    if (std::isnan(v)) throw usage_error("extended real: NaN is not a value");
  }

  static constexpr ExtReal pos_inf() { return ExtReal(Raw{}, std::numeric_limits<double>::infinity()); }
  static constexpr ExtReal neg_inf() { return ExtReal(Raw{}, -std::numeric_limits<double>::infinity()); }

  constexpr double value() const noexcept { return v_; }
  constexpr bool is_finite() const noexcept { return v_ > -kInf && v_ < kInf; }
  constexpr bool is_pos_inf() const noexcept { return v_ == kInf; }
  constexpr bool is_neg_inf() const noexcept { return v_ == -kInf; }

  /// x + c for a finite constant c (infinities absorb it).
  ExtReal shifted(double c) const {
    if (!std::isfinite(c)) throw usage_error("extended real: shift must be finite");
    return is_finite() ? ExtReal(v_ + c) : *this;
  }

  friend constexpr bool operator==(ExtReal a, ExtReal b) noexcept { return a.v_ == b.v_; }
  friend constexpr std::partial_ordering operator<=>(ExtReal a, ExtReal b) noexcept { return a.v_ <=> b.v_; }

  std::string to_string() const { return format_double(v_); }

 private:
  struct Raw {};
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr ExtReal(Raw, double v) : v_(v) {}
  double v_ = 0.0;
};

inline ExtReal min(ExtReal a, ExtReal b) noexcept { return b < a ? b : a; }

/// A function on the lattice with values in the extended reals. On a finite
/// lattice every such function is lower semicontinuous; the type stands for
/// the samples of an lsc function on the window.
class LscFunction {
 public:
  LscFunction() = default;
  LscFunction(GridPtr grid, std::vector<ExtReal> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw usage_error("lsc function: null grid");
    if (values_.size() != grid_->size()) throw usage_error("lsc function: one value per lattice point required");
  }

  /// Samples `fn` at every lattice point; fn receives the coordinate pair.
  template <class Fn>
  static LscFunction sample(GridPtr grid, Fn&& fn) {
    if (!grid) throw usage_error("lsc function: null grid");
    std::vector<ExtReal> v;
    v.reserve(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i) v.emplace_back(fn(grid->coords(i)));
    return LscFunction(std::move(grid), std::move(v));
  }

  static LscFunction constant(GridPtr grid, ExtReal c) {
    const std::size_t n = grid ? grid->size() : 0;
    return LscFunction(std::move(grid), std::vector<ExtReal>(n, c));
  }

  const GridPtr& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  ExtReal operator[](std::size_t i) const noexcept { return values_[i]; }
  ExtReal at(const Point& p) const {
    require_same_grid(grid_, p.grid(), "lsc function");
    return values_[p.index()];
  }
  std::span<const ExtReal> values() const noexcept { return values_; }
  void set(std::size_t i, ExtReal v) { values_.at(i) = v; }

  LscFunction shifted(double c) const {
    LscFunction out = *this;
    for (auto& v : out.values_) v = v.shifted(c);
    return out;
  }

 private:
  GridPtr grid_;
  std::vector<ExtReal> values_;
};

/// I_A(f) = min of f over A; +inf for A = ∅.
inline ExtReal inf_over(const LscFunction& f, const ClosedSet& A) {
  require_same_grid(f.grid(), A.grid(), "inf_over");
  ExtReal best = ExtReal::pos_inf();
  for (auto i : A.members()) {
    best = min(best, f[i]);
    if (best.is_neg_inf()) break;
  }
  return best;
}

/// I_E(f) over the whole lattice.
inline ExtReal inf_all(const LscFunction& f) {
  ExtReal best = ExtReal::pos_inf();
  for (auto v : f.values()) best = min(best, v);
  return best;
}

namespace detail {

/// First ordinate index of the clipped epigraph column over a point with
/// value v; ordinate_count() when the column is empty.
inline std::size_t column_start(const Grid& g, ExtReal v) {
  const std::size_t nv = g.ordinate_count();
  if (v.is_neg_inf()) return 0;
  if (v.is_pos_inf()) return nv;
  const double level = std::max(v.value(), g.spec().value_lo);
  const auto [first, last] = g.ordinate_range(level - kSlack, g.spec().value_hi + kSlack);
  if (first > last) return nv;
  return static_cast<std::size_t>(first);
}

inline std::vector<std::uint8_t> epigraph_mask(const LscFunction& f) {
  const Grid& g = *f.grid();
  const std::size_t nv = g.ordinate_count();
  std::vector<std::uint8_t> m(g.product_size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::size_t k0 = column_start(g, f[i]);
    std::fill(m.begin() + static_cast<std::ptrdiff_t>(i * nv + k0),
              m.begin() + static_cast<std::ptrdiff_t>((i + 1) * nv), std::uint8_t{1});
  }
  return m;
}

}  // namespace detail

/// epi(f) = {(x, a) : f(x) <= a} on the product lattice, clipped to the
/// ordinate window: a −inf value fills its column, values below value_lo
/// start at value_lo, values above value_hi leave the column empty.
inline ProductSet epigraph(const LscFunction& f) {
  if (!f.grid()) throw usage_error("epigraph: function has no grid");
  const Grid& g = *f.grid();
  const std::size_t nv = g.ordinate_count();
  std::vector<ProductSet::index_type> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t k = detail::column_start(g, f[i]); k < nv; ++k) {
      out.push_back(static_cast<ProductSet::index_type>(i * nv + k));
    }
  }
  return ProductSet::from_sorted(f.grid(), std::move(out));
}

/// epi(f) hits the closed product ball around (x, alpha) of radius r,
/// decided through I_{closed ball(x,r)}(f) <= r + alpha.
inline bool epi_hits_product_ball(const LscFunction& f, const Point& x, double r, double alpha) {
  if (r < 0.0) throw usage_error("epi_hits_product_ball: r must be >= 0");
  const ExtReal inf = inf_over(f, closed_ball(x, r));
  return inf <= ExtReal(r + alpha + kSlack);
}

inline bool epi_misses_product_ball(const LscFunction& f, const Point& x, double r, double alpha) {
  return !epi_hits_product_ball(f, x, r, alpha);
}

/// Interior counterpart: the infimum over the open ball is strictly below
/// r + alpha.
inline bool epi_hits_open_product_ball(const LscFunction& f, const Point& x, double r, double alpha) {
  if (!(r > 0.0)) throw usage_error("epi_hits_open_product_ball: r must be > 0");
  const ExtReal inf = inf_over(f, open_ball(x, r));
  return inf < ExtReal(r + alpha - kSlack);
}

struct EpiConvergence {
  bool converged = false;
  SetConvergence sets;  // epigraph check on the product lattice
};

/// Epi-convergence of the tail of `seq` to f, certified as Fell convergence
/// of the (clipped) epigraphs on the product lattice.
inline EpiConvergence epi_converges(std::span<const LscFunction> seq, const LscFunction& f, std::size_t tail_start,
                                    double tol) {
  if (seq.empty()) throw usage_error("epi_converges: empty sequence");
  if (tail_start >= seq.size()) throw usage_error("epi_converges: tail_start beyond the sequence");
  const Grid& g = *f.grid();
  if (tol + kSlack < std::max(g.h(), g.h_v())) throw usage_error("epi_converges: tol below lattice resolution");
  for (const auto& fn : seq) require_same_grid(f.grid(), fn.grid(), "epi_converges");
  const LatticeShape shape = g.shape(true);
  detail::TailLimits acc(shape, tol);
  for (std::size_t n = tail_start; n < seq.size(); ++n) acc.add(detail::epigraph_mask(seq[n]));
  EpiConvergence out;
  out.sets = detail::assess(shape, acc, detail::epigraph_mask(f), tol, tail_start, true);
  out.converged = out.sets.converged;
  return out;
}

}  // namespace epilab
