#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <vector>

#include "epilab/closed_set.hpp"
#include "epilab/grid.hpp"

namespace epilab {

/// A lattice point of the carrier window. All lattice points together form
/// the countable dense set used for ball centers.
class Point {
 public:
  Point() = default;
  Point(GridPtr grid, std::size_t index) : grid_(std::move(grid)), index_(index) {
    if (!grid_) throw usage_error("point: null grid");
    if (index_ >= grid_->size()) throw usage_error("point: index outside the lattice");
  }

  /// Exact lattice point with the given coordinates; usage_error if the
  /// coordinates are off the lattice.
  static Point at(GridPtr grid, std::initializer_list<double> x) {
    std::vector<double> v(x);
    if (!grid) throw usage_error("point: null grid");
    if (!grid->on_lattice(v)) throw usage_error("point: coordinates are not on the lattice");
    const std::size_t index = grid->nearest(v);
    return Point(std::move(grid), index);
  }

  /// Nearest lattice point, clamped into the window.
  static Point nearest(GridPtr grid, std::span<const double> x) {
    if (!grid) throw usage_error("point: null grid");
    const std::size_t index = grid->nearest(x);
    return Point(std::move(grid), index);
  }
  static Point nearest(GridPtr grid, std::initializer_list<double> x) {
    std::vector<double> v(x);
    return nearest(std::move(grid), std::span<const double>(v));
  }

  const GridPtr& grid() const noexcept { return grid_; }
  std::size_t index() const noexcept { return index_; }
  double coord(int axis) const { return grid_->coord(index_, axis); }
  std::array<double, 2> coords() const { return grid_->coords(index_); }

  friend bool operator==(const Point& a, const Point& b) { return same_grid(a.grid_, b.grid_) && a.index_ == b.index_; }

 private:
  GridPtr grid_;
  std::size_t index_ = 0;
};

/// A point (x, alpha) of the product lattice E x R.
class ProductPoint {
 public:
  ProductPoint() = default;
  ProductPoint(Point base, std::size_t ordinate_index) : base_(std::move(base)), ordinate_index_(ordinate_index) {
    if (ordinate_index_ >= base_.grid()->ordinate_count()) throw usage_error("product point: ordinate outside window");
  }

  /// usage_error unless `alpha` lies on the ordinate lattice.
  static ProductPoint at(Point base, double alpha) {
    const Grid& g = *base.grid();
    if (!g.ordinate_on_lattice(alpha)) throw usage_error("product point: ordinate is not on the lattice");
    const std::size_t k = g.nearest_ordinate(alpha);
    return ProductPoint(std::move(base), k);
  }

  const Point& base() const noexcept { return base_; }
  std::size_t ordinate_index() const noexcept { return ordinate_index_; }
  double ordinate() const { return base_.grid()->ordinate(ordinate_index_); }
  std::size_t index() const { return base_.index() * base_.grid()->ordinate_count() + ordinate_index_; }

  friend bool operator==(const ProductPoint& a, const ProductPoint& b) {
    return a.base_ == b.base_ && a.ordinate_index_ == b.ordinate_index_;
  }

 private:
  Point base_;
  std::size_t ordinate_index_ = 0;
};

/// Euclidean distance between two lattice points.
inline double dist(const Point& p, const Point& q) {
  require_same_grid(p.grid(), q.grid(), "dist");
  const auto a = p.coords();
  const auto b = q.coords();
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

/// max{ dist(x, y), |alpha - beta| }, the metric whose balls are rectangles.
inline double product_dist(const ProductPoint& p, const ProductPoint& q) {
  return std::max(dist(p.base(), q.base()), std::abs(p.ordinate() - q.ordinate()));
}

namespace detail {

// Visits every lattice index whose distance to `center` is <= r (strict:
// < r). Only cells inside the coordinate bounding box are examined.
template <class Fn>
void for_each_in_ball(const Grid& g, const std::array<double, 2>& center, double r, bool strict, Fn&& fn) {
  if (r < 0.0 || (strict && r <= 0.0)) return;
  auto inside = [&](double d) { return strict ? d < r - kSlack : d <= r + kSlack; };
  const auto [a0, b0] = g.axis_range(0, center[0] - r - kSlack, center[0] + r + kSlack);
  if (g.dim() == 1) {
    for (long long i = a0; i <= b0; ++i) {
      const double d = std::abs(g.axis_value(0, static_cast<std::size_t>(i)) - center[0]);
      if (inside(d)) fn(g.index_of(static_cast<std::size_t>(i)));
    }
    return;
  }
  const auto [a1, b1] = g.axis_range(1, center[1] - r - kSlack, center[1] + r + kSlack);
  for (long long i = a0; i <= b0; ++i) {
    const double dx = g.axis_value(0, static_cast<std::size_t>(i)) - center[0];
    for (long long j = a1; j <= b1; ++j) {
      const double dy = g.axis_value(1, static_cast<std::size_t>(j)) - center[1];
      if (inside(std::hypot(dx, dy))) fn(g.index_of(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
    }
  }
}

inline std::vector<ClosedSet::index_type> ball_members(const Grid& g, const std::array<double, 2>& center, double r,
                                                       bool strict) {
  std::vector<ClosedSet::index_type> out;
  for_each_in_ball(g, center, r, strict, [&](std::size_t i) { out.push_back(static_cast<ClosedSet::index_type>(i)); });
  return out;
}

}  // namespace detail

/// All lattice points within distance r of `center`; empty for r < 0.
inline ClosedSet closed_ball(const Point& center, double r) {
  const Grid& g = *center.grid();
  return ClosedSet::from_sorted(center.grid(), detail::ball_members(g, center.coords(), r, false));
}

/// Lattice points with distance strictly below r.
inline ClosedSet open_ball(const Point& center, double r) {
  const Grid& g = *center.grid();
  return ClosedSet::from_sorted(center.grid(), detail::ball_members(g, center.coords(), r, true));
}

/// base x {ordinates in [a_lo, a_hi]} on the product lattice.
inline ProductSet product_rectangle(const ClosedSet& base, double a_lo, double a_hi) {
  const Grid& g = *base.grid();
  const auto [k0, k1] = g.ordinate_range(a_lo - kSlack, a_hi + kSlack);
  std::vector<ProductSet::index_type> out;
  if (k0 <= k1) {
    out.reserve(base.size() * static_cast<std::size_t>(k1 - k0 + 1));
    const std::size_t nv = g.ordinate_count();
    for (auto b : base.members()) {
      for (long long k = k0; k <= k1; ++k) {
        out.push_back(static_cast<ProductSet::index_type>(b * nv + static_cast<std::size_t>(k)));
      }
    }
  }
  return ProductSet::from_sorted(base.grid(), std::move(out));
}

/// Closed ball of the product metric. Computed by direct enumeration of the
/// metric so that its agreement with the rectangle
/// closed_ball(x, r) x [alpha - r, alpha + r] is a checkable property.
inline ProductSet product_closed_ball(const ProductPoint& center, double r) {
  const Grid& g = *center.base().grid();
  std::vector<ProductSet::index_type> out;
  if (r < 0.0) return ProductSet::from_sorted(center.base().grid(), std::move(out));
  const std::size_t nv = g.ordinate_count();
  const double alpha = center.ordinate();
  const auto c = center.base().coords();
  const auto [k0, k1] = g.ordinate_range(alpha - r - kSlack, alpha + r + kSlack);
  auto emit_column = [&](std::size_t b) {
    const auto x = g.coords(b);
    const double base_d = std::hypot(x[0] - c[0], x[1] - c[1]);
    for (long long k = k0; k <= k1; ++k) {
      const double d = std::max(base_d, std::abs(g.ordinate(static_cast<std::size_t>(k)) - alpha));
      if (d <= r + kSlack) out.push_back(static_cast<ProductSet::index_type>(b * nv + static_cast<std::size_t>(k)));
    }
  };
  // Scan the whole bounding box of the base coordinates.
  const auto [a0, b0] = g.axis_range(0, c[0] - r - kSlack, c[0] + r + kSlack);
  for (long long i = a0; i <= b0; ++i) {
    if (g.dim() == 1) {
      emit_column(g.index_of(static_cast<std::size_t>(i)));
      continue;
    }
    const auto [a1, b1] = g.axis_range(1, c[1] - r - kSlack, c[1] + r + kSlack);
    for (long long j = a1; j <= b1; ++j) emit_column(g.index_of(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
  }
  return ProductSet::from_sorted(center.base().grid(), std::move(out));
}

}  // namespace epilab
