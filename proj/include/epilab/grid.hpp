#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "epilab/error.hpp"

namespace epilab {

/// Absolute slack for comparisons of distances and levels computed from
/// lattice coordinates. Far below any lattice spacing in use.
inline constexpr double kSlack = 1e-9;

/// Discretized carrier window: an axis-aligned box in R^1 or R^2 with a
/// uniform lattice of spacing `h`, plus the ordinate axis used for
/// epigraphs in the product space.
struct GridSpec {
  int dim = 1;
  std::array<double, 2> lo{-4.0, -4.0};
  std::array<double, 2> hi{4.0, 4.0};
  double h = 0.01;
  double value_lo = -4.0;
  double value_hi = 4.0;
  double h_v = 0.01;

  bool operator==(const GridSpec&) const = default;
};

namespace detail {

inline bool near_integer(double q, double* rounded) {
  const double n = std::round(q);
  *rounded = n;
  return std::abs(q - n) <= 1e-6 * std::max(1.0, std::abs(n));
}

/// One lattice axis {lo + k*h : k = 0..count-1}.
class Axis {
 public:
  Axis() = default;
  Axis(double lo, double hi, double h, const char* name) : lo_(lo), h_(h) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(h) || !(h > 0.0)) {
      throw usage_error(std::string(name) + ": bounds and spacing must be finite with spacing > 0");
    }
    if (!(hi > lo)) throw usage_error(std::string(name) + ": hi must exceed lo");
    double steps = 0.0;
    if (!near_integer((hi - lo) / h, &steps) || steps < 1.0) {
      throw usage_error(std::string(name) + ": (hi - lo) / h must be a positive integer");
    }
    count_ = static_cast<std::size_t>(steps) + 1;
    // Prefer (integer / integer) so decimal lattices such as 0.01 give
    // correctly rounded coordinates (-1, 0.1, ...), then integer * h.
    double inv = 0.0;
    double base = 0.0;
    if (near_integer(1.0 / h, &inv) && inv > 0.0 && near_integer(lo * inv, &base)) {
      mode_ = Mode::kDivide;
      scale_ = inv;
      base_ = base;
    } else if (near_integer(lo / h, &base)) {
      mode_ = Mode::kMultiply;
      base_ = base;
    }
  }

  std::size_t count() const noexcept { return count_; }
  double spacing() const noexcept { return h_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return at(count_ - 1); }

  double at(std::size_t k) const noexcept {
    switch (mode_) {
      case Mode::kDivide:
        return (base_ + static_cast<double>(k)) / scale_;
      case Mode::kMultiply:
        return (base_ + static_cast<double>(k)) * h_;
      case Mode::kAffine:
        break;
    }
    return lo_ + static_cast<double>(k) * h_;
  }

  /// Nearest lattice index, clamped into the window.
  std::size_t nearest(double x) const noexcept {
    const double q = std::round((x - lo_) / h_);
    if (!(q > 0.0)) return 0;
    if (q >= static_cast<double>(count_ - 1)) return count_ - 1;
    return static_cast<std::size_t>(q);
  }

  bool on_lattice(double x) const noexcept {
    const double q = (x - lo_) / h_;
    double n = 0.0;
    return near_integer(q, &n) && n >= 0.0 && n <= static_cast<double>(count_ - 1);
  }

 private:
  enum class Mode { kAffine, kMultiply, kDivide };
  double lo_ = 0.0;
  double h_ = 1.0;
  std::size_t count_ = 1;
  Mode mode_ = Mode::kAffine;
  double scale_ = 1.0;
  double base_ = 0.0;
};

}  // namespace detail

/// Row-major lattice geometry used by the set algorithms. The carrier space
/// has rank = dim; the product space E x R appends the ordinate axis and
/// measures distance by max{euclidean base distance, ordinate gap}.
struct LatticeShape {
  int rank = 1;
  int base_rank = 1;
  bool product = false;
  std::array<std::size_t, 3> extent{1, 1, 1};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::array<std::size_t, 3> stride{1, 1, 1};

  std::size_t size() const noexcept {
    std::size_t n = 1;
    for (int a = 0; a < rank; ++a) n *= extent[a];
    return n;
  }

  std::array<std::size_t, 3> unflatten(std::size_t index) const noexcept {
    std::array<std::size_t, 3> c{0, 0, 0};
    for (int a = 0; a < rank; ++a) {
      c[a] = index / stride[a];
      index %= stride[a];
    }
    return c;
  }

  std::size_t flatten(const std::array<std::size_t, 3>& c) const noexcept {
    std::size_t index = 0;
    for (int a = 0; a < rank; ++a) index += c[a] * stride[a];
    return index;
  }

  /// Metric distance between two cells given their per-axis index offsets.
  double metric(const std::array<long long, 3>& delta) const noexcept {
    double base = 0.0;
    for (int a = 0; a < base_rank; ++a) {
      const double d = static_cast<double>(delta[a]) * spacing[a];
      base += d * d;
    }
    base = std::sqrt(base);
    if (!product) return base;
    return std::max(base, std::abs(static_cast<double>(delta[base_rank]) * spacing[base_rank]));
  }

  double distance(std::size_t i, std::size_t j) const noexcept {
    const auto ci = unflatten(i);
    const auto cj = unflatten(j);
    std::array<long long, 3> delta{0, 0, 0};
    for (int a = 0; a < rank; ++a) {
      delta[a] = static_cast<long long>(ci[a]) - static_cast<long long>(cj[a]);
    }
    return metric(delta);
  }

  double min_spacing() const noexcept {
    double m = spacing[0];
    for (int a = 1; a < rank; ++a) m = std::min(m, spacing[a]);
    return m;
  }
};

/// Immutable lattice built from a validated GridSpec. Carrier points are
/// numbered row-major (axis 0 slowest); product points as
/// base_index * ordinate_count() + ordinate_index.
class Grid {
 public:
  explicit Grid(const GridSpec& spec) : spec_(spec) {
    if (spec.dim != 1 && spec.dim != 2) throw usage_error("grid: dim must be 1 or 2");
    for (int a = 0; a < spec.dim; ++a) {
      axes_[a] = detail::Axis(spec.lo[a], spec.hi[a], spec.h, a == 0 ? "grid axis 0" : "grid axis 1");
    }
    ordinate_ = detail::Axis(spec.value_lo, spec.value_hi, spec.h_v, "ordinate axis");
    size_ = axes_[0].count() * (spec.dim == 2 ? axes_[1].count() : 1);
    if (size_ * ordinate_.count() > (std::size_t{1} << 31)) {
      throw usage_error("grid: product lattice too large");
    }
  }

  const GridSpec& spec() const noexcept { return spec_; }
  int dim() const noexcept { return spec_.dim; }
  double h() const noexcept { return spec_.h; }
  double h_v() const noexcept { return spec_.h_v; }
  std::size_t extent(int axis) const noexcept { return axes_[axis].count(); }
  std::size_t size() const noexcept { return size_; }
  std::size_t ordinate_count() const noexcept { return ordinate_.count(); }
  std::size_t product_size() const noexcept { return size_ * ordinate_.count(); }

  std::array<std::size_t, 2> cell(std::size_t index) const noexcept {
    if (spec_.dim == 1) return {index, 0};
    return {index / axes_[1].count(), index % axes_[1].count()};
  }

  std::size_t index_of(std::size_t i0, std::size_t i1 = 0) const noexcept {
    return spec_.dim == 1 ? i0 : i0 * axes_[1].count() + i1;
  }

  double coord(std::size_t index, int axis) const noexcept { return axes_[axis].at(cell(index)[axis]); }

  std::array<double, 2> coords(std::size_t index) const noexcept {
    const auto c = cell(index);
    return {axes_[0].at(c[0]), spec_.dim == 2 ? axes_[1].at(c[1]) : 0.0};
  }

  double axis_value(int axis, std::size_t k) const noexcept { return axes_[axis].at(k); }
  double ordinate(std::size_t k) const noexcept { return ordinate_.at(k); }

  std::size_t nearest(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != spec_.dim) throw usage_error("grid: coordinate arity does not match dim");
    return spec_.dim == 1 ? axes_[0].nearest(x[0]) : index_of(axes_[0].nearest(x[0]), axes_[1].nearest(x[1]));
  }

  bool on_lattice(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != spec_.dim) return false;
    for (int a = 0; a < spec_.dim; ++a) {
      if (!axes_[a].on_lattice(x[a])) return false;
    }
    return true;
  }

  std::size_t nearest_ordinate(double a) const noexcept { return ordinate_.nearest(a); }
  bool ordinate_on_lattice(double a) const noexcept { return ordinate_.on_lattice(a); }

  /// Index range [first, last] of lattice positions along base `axis` whose
  /// coordinate lies in [a, b]; empty when first > last.
  std::pair<long long, long long> axis_range(int axis, double a, double b) const noexcept {
    return range_of(axes_[axis], a, b);
  }

  /// Same as axis_range for the ordinate axis.
  std::pair<long long, long long> ordinate_range(double a, double b) const noexcept {
    return range_of(ordinate_, a, b);
  }

  LatticeShape shape(bool product) const noexcept {
    LatticeShape s;
    s.base_rank = spec_.dim;
    s.product = product;
    s.rank = spec_.dim + (product ? 1 : 0);
    for (int a = 0; a < spec_.dim; ++a) {
      s.extent[a] = axes_[a].count();
      s.spacing[a] = spec_.h;
    }
    if (product) {
      s.extent[spec_.dim] = ordinate_.count();
      s.spacing[spec_.dim] = spec_.h_v;
    }
    std::size_t stride = 1;
    for (int a = s.rank - 1; a >= 0; --a) {
      s.stride[a] = stride;
      stride *= s.extent[a];
    }
    return s;
  }

 private:
  static std::pair<long long, long long> range_of(const detail::Axis& ax, double a, double b) noexcept {
    const double top = static_cast<double>(ax.count() - 1);
    double first = std::ceil((a - ax.lo()) / ax.spacing() - 1e-7);
    double last = std::floor((b - ax.lo()) / ax.spacing() + 1e-7);
    if (!(first == first) || !(last == last)) return {1, 0};
    first = std::clamp(first, 0.0, top + 1.0);
    last = std::clamp(last, -1.0, top);
    return {static_cast<long long>(first), static_cast<long long>(last)};
  }

  GridSpec spec_;
  std::array<detail::Axis, 2> axes_{};
  detail::Axis ordinate_{};
  std::size_t size_ = 0;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(const GridSpec& spec) { return std::make_shared<const Grid>(spec); }

inline bool same_grid(const GridPtr& a, const GridPtr& b) noexcept {
  return a && b && (a.get() == b.get() || a->spec() == b->spec());
}

inline void require_same_grid(const GridPtr& a, const GridPtr& b, const char* op) {
  if (!same_grid(a, b)) throw usage_error(std::string(op) + ": operands live on different grids");
}

}  // namespace epilab
