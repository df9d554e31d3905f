#pragma once

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <span>
#include <utility>
#include <vector>

#include "epilab/grid.hpp"

namespace epilab {

/// Space tags. A closed set either lives in the carrier lattice E or in the
/// product lattice E x R (epigraphs, product balls).
struct CarrierSpace {
  static constexpr bool product = false;
  static constexpr const char* name = "carrier";
};
struct ProductSpace {
  static constexpr bool product = true;
  static constexpr const char* name = "product";
};

/// A closed set of the discretized space: a finite, sorted set of lattice
/// indices. On the lattice every subset is closed and compact, so no
/// topological bookkeeping is needed; equality and set algebra are exact.
template <class Space>
class BasicClosedSet {
 public:
  using space = Space;
  using index_type = std::uint32_t;

  BasicClosedSet() = default;
  explicit BasicClosedSet(GridPtr grid) : grid_(std::move(grid)) {
    if (!grid_) throw usage_error("closed set: null grid");
  }

  BasicClosedSet(GridPtr grid, std::vector<index_type> members) : grid_(std::move(grid)), members_(std::move(members)) {
    if (!grid_) throw usage_error("closed set: null grid");
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    if (!members_.empty() && members_.back() >= universe_size()) {
      throw usage_error("closed set: member index outside the lattice");
    }
  }

  static BasicClosedSet full(GridPtr grid) {
    BasicClosedSet s(std::move(grid));
    s.members_.resize(s.universe_size());
    for (std::size_t i = 0; i < s.members_.size(); ++i) s.members_[i] = static_cast<index_type>(i);
    return s;
  }

  static BasicClosedSet from_mask(GridPtr grid, std::span<const std::uint8_t> mask) {
    BasicClosedSet s(std::move(grid));
    if (mask.size() != s.universe_size()) throw usage_error("closed set: mask size does not match lattice");
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i]) s.members_.push_back(static_cast<index_type>(i));
    }
    return s;
  }

  /// Builds from indices already known to be sorted, unique and in range.
  static BasicClosedSet from_sorted(GridPtr grid, std::vector<index_type> members) {
    BasicClosedSet s(std::move(grid));
    s.members_ = std::move(members);
    return s;
  }

  const GridPtr& grid() const noexcept { return grid_; }
  LatticeShape shape() const { return checked_grid().shape(Space::product); }
  std::size_t universe_size() const {
    const Grid& g = checked_grid();
    return Space::product ? g.product_size() : g.size();
  }

  std::span<const index_type> members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }

  bool contains(std::size_t index) const noexcept {
    return std::binary_search(members_.begin(), members_.end(), static_cast<index_type>(index));
  }

  std::vector<std::uint8_t> mask() const {
    std::vector<std::uint8_t> m(universe_size(), 0);
    for (index_type i : members_) m[i] = 1;
    return m;
  }

  BasicClosedSet unite(const BasicClosedSet& other) const {
    require_same_grid(grid_, other.grid_, "union");
    std::vector<index_type> out;
    out.reserve(members_.size() + other.members_.size());
    std::set_union(members_.begin(), members_.end(), other.members_.begin(), other.members_.end(),
                   std::back_inserter(out));
    return from_sorted(grid_, std::move(out));
  }

  BasicClosedSet intersect(const BasicClosedSet& other) const {
    require_same_grid(grid_, other.grid_, "intersection");
    std::vector<index_type> out;
    std::set_intersection(members_.begin(), members_.end(), other.members_.begin(), other.members_.end(),
                          std::back_inserter(out));
    return from_sorted(grid_, std::move(out));
  }

  bool is_subset_of(const BasicClosedSet& other) const {
    require_same_grid(grid_, other.grid_, "subset");
    return std::includes(other.members_.begin(), other.members_.end(), members_.begin(), members_.end());
  }

  friend bool operator==(const BasicClosedSet& a, const BasicClosedSet& b) {
    return same_grid(a.grid_, b.grid_) && a.members_ == b.members_;
  }

 private:
  const Grid& checked_grid() const {
    if (!grid_) throw usage_error("closed set: no grid attached");
    return *grid_;
  }

  GridPtr grid_;
  std::vector<index_type> members_;
};

using ClosedSet = BasicClosedSet<CarrierSpace>;
using ProductSet = BasicClosedSet<ProductSpace>;

/// Dense membership view of a closed set, for repeated hit tests against a
/// fixed target.
template <class Space>
class SetMask {
 public:
  SetMask() = default;
  explicit SetMask(const BasicClosedSet<Space>& set) : grid_(set.grid()), bits_(set.mask()), count_(set.size()) {}

  const GridPtr& grid() const noexcept { return grid_; }
  bool test(std::size_t index) const noexcept { return bits_[index] != 0; }
  std::size_t count() const noexcept { return count_; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

 private:
  GridPtr grid_;
  std::vector<std::uint8_t> bits_;
  std::size_t count_ = 0;
};

}  // namespace epilab
