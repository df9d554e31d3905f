#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "epilab/carrier.hpp"
#include "epilab/hyperspace.hpp"
#include "epilab/stochastic/samplers.hpp"

namespace epilab {

/// Monte Carlo estimate of a probability: value = count / n_samples.
struct CapacityEstimate {
  double value = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t count = 0;
  double std_error = 0.0;
  bool exact = false;  // analytic value or deterministic sampler

  static CapacityEstimate from_count(std::uint64_t count, std::uint64_t n) {
    CapacityEstimate e;
    e.n_samples = n;
    e.count = count;
    e.value = static_cast<double>(count) / static_cast<double>(n);
    e.std_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(n));
    return e;
  }

  static CapacityEstimate analytic(double value) {
    CapacityEstimate e;
    e.value = value;
    e.exact = true;
    return e;
  }
};

namespace detail {

/// Runs `fn(replicate, flags)` for every replicate and counts the raised
/// flags. A deterministic source is evaluated once and its flags scaled.
template <class Fn>
std::vector<std::uint64_t> count_events(std::size_t n_events, std::uint64_t N, bool deterministic, Fn&& fn) {
  if (N == 0) throw usage_error("Monte Carlo: N must be >= 1");
  std::vector<std::uint64_t> counts(n_events, 0);
  std::vector<std::uint8_t> flags(n_events, 0);
  const std::uint64_t reps = deterministic ? 1 : N;
  for (std::uint64_t r = 0; r < reps; ++r) {
    std::fill(flags.begin(), flags.end(), std::uint8_t{0});
    fn(r, flags);
    for (std::size_t e = 0; e < n_events; ++e) counts[e] += flags[e];
  }
  if (deterministic) {
    for (auto& c : counts) c *= N;
  }
  return counts;
}

inline std::vector<CapacityEstimate> to_estimates(const std::vector<std::uint64_t>& counts, std::uint64_t N,
                                                  bool deterministic) {
  std::vector<CapacityEstimate> out;
  out.reserve(counts.size());
  for (auto c : counts) {
    out.push_back(CapacityEstimate::from_count(c, N));
    out.back().exact = deterministic;
  }
  return out;
}

}  // namespace detail

/// T̂(B) for several targets on one replicate stream, so the estimates are
/// coupled (monotone in B, exact complements, ...).
inline std::vector<CapacityEstimate> estimate_capacities(const SetSampler& s, std::span<const ClosedSet> Bs,
                                                         std::uint64_t N, std::uint64_t seed) {
  std::vector<SetMask<CarrierSpace>> masks;
  masks.reserve(Bs.size());
  for (const auto& B : Bs) {
    require_same_grid(s.grid, B.grid(), "estimate_capacity");
    masks.emplace_back(B);
  }
  const auto counts = detail::count_events(Bs.size(), N, s.deterministic, [&](std::uint64_t r, auto& flags) {
    const ClosedSet C = s.draw(seed, r);
    for (std::size_t j = 0; j < masks.size(); ++j) flags[j] = hits(C, masks[j]);
  });
  return detail::to_estimates(counts, N, s.deterministic);
}

/// T̂(B) = fraction of replicates with C ∩ B ≠ ∅.
inline CapacityEstimate estimate_capacity(const SetSampler& s, const ClosedSet& B, std::uint64_t N,
                                          std::uint64_t seed) {
  return estimate_capacities(s, std::span<const ClosedSet>(&B, 1), N, seed).front();
}

/// Fraction of replicates that hit every B_j (or miss it, where invert[j]).
inline CapacityEstimate estimate_joint_hit(const SetSampler& s, std::span<const ClosedSet> Bs, std::uint64_t N,
                                           std::uint64_t seed, std::span<const bool> invert = {}) {
  if (Bs.empty()) throw usage_error("estimate_joint_hit: empty target list");
  if (!invert.empty() && invert.size() != Bs.size()) throw usage_error("estimate_joint_hit: invert size mismatch");
  std::vector<SetMask<CarrierSpace>> masks;
  for (const auto& B : Bs) {
    require_same_grid(s.grid, B.grid(), "estimate_joint_hit");
    masks.emplace_back(B);
  }
  const auto counts = detail::count_events(1, N, s.deterministic, [&](std::uint64_t r, auto& flags) {
    const ClosedSet C = s.draw(seed, r);
    bool all = true;
    for (std::size_t j = 0; j < masks.size() && all; ++j) {
      const bool h = hits(C, masks[j]);
      all = invert.empty() || !invert[j] ? h : !h;
    }
    flags[0] = all;
  });
  return detail::to_estimates(counts, N, s.deterministic).front();
}

/// Joint hit estimates for every nonempty subset of Bs (keys are sorted
/// 0-based index lists), all from one replicate stream.
inline std::map<std::vector<std::size_t>, CapacityEstimate> joint_hit_table(const SetSampler& s,
                                                                            std::span<const ClosedSet> Bs,
                                                                            std::uint64_t N, std::uint64_t seed) {
  const std::size_t m = Bs.size();
  if (m == 0 || m > 16) throw usage_error("joint_hit_table: need 1..16 targets");
  std::vector<SetMask<CarrierSpace>> masks;
  for (const auto& B : Bs) masks.emplace_back(B);
  const std::size_t n_subsets = (std::size_t{1} << m) - 1;
  const auto counts = detail::count_events(n_subsets, N, s.deterministic, [&](std::uint64_t r, auto& flags) {
    const ClosedSet C = s.draw(seed, r);
    std::size_t hit_bits = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (hits(C, masks[j])) hit_bits |= std::size_t{1} << j;
    }
    for (std::size_t sub = 1; sub <= n_subsets; ++sub) flags[sub - 1] = (hit_bits & sub) == sub;
  });
  const auto est = detail::to_estimates(counts, N, s.deterministic);
  std::map<std::vector<std::size_t>, CapacityEstimate> out;
  for (std::size_t sub = 1; sub <= n_subsets; ++sub) {
    std::vector<std::size_t> key;
    for (std::size_t j = 0; j < m; ++j) {
      if (sub & (std::size_t{1} << j)) key.push_back(j);
    }
    out.emplace(std::move(key), est[sub - 1]);
  }
  return out;
}

/// Σ_k (−1)^{k+1} Σ_{i1<…<ik} joint({i1..ik}) over the index set {0..m−1}
/// spanned by the keys. Every nonempty subset must be present.
inline double inclusion_exclusion_union(const std::map<std::vector<std::size_t>, double>& joint) {
  std::size_t m = 0;
  for (const auto& [key, v] : joint) {
    if (key.empty()) throw usage_error("inclusion_exclusion_union: empty subset key");
    for (auto i : key) m = std::max(m, i + 1);
  }
  if (m == 0) throw usage_error("inclusion_exclusion_union: no subsets");
  if (m > 20) throw usage_error("inclusion_exclusion_union: too many sets");
  double total = 0.0;
  for (std::size_t sub = 1; sub < (std::size_t{1} << m); ++sub) {
    std::vector<std::size_t> key;
    for (std::size_t j = 0; j < m; ++j) {
      if (sub & (std::size_t{1} << j)) key.push_back(j);
    }
    const auto it = joint.find(key);
    if (it == joint.end()) throw usage_error("inclusion_exclusion_union: missing joint probability for a subset");
    total += (key.size() % 2 == 1 ? 1.0 : -1.0) * it->second;
  }
  return total;
}

inline double inclusion_exclusion_union(const std::map<std::vector<std::size_t>, CapacityEstimate>& joint) {
  std::map<std::vector<std::size_t>, double> values;
  for (const auto& [k, e] : joint) values.emplace(k, e.value);
  return inclusion_exclusion_union(values);
}

struct ScreenRow {
  double radius = 0.0;
  CapacityEstimate outer;  // T̂(ball(c, r + delta))
  CapacityEstimate inner;  // T̂(ball(c, r - delta))
  double jump = 0.0;
  double threshold = 0.0;
  bool accepted = false;
};

struct ScreenResult {
  std::vector<double> accepted;
  std::vector<ScreenRow> rows;
  bool analytic = false;
};

/// Finite-difference continuity screen around `center`: r is kept iff
/// |T̂(ball(c, r+δ)) − T̂(ball(c, r−δ))| ≤ κ + 6·SE. The sampler's analytic
/// capacity is used when it has one (SE = 0).
inline ScreenResult detect_continuity_radii(const SetSampler& s, const Point& center,
                                            std::span<const double> candidate_radii, double delta, std::uint64_t N,
                                            std::uint64_t seed, double kappa) {
  require_same_grid(s.grid, center.grid(), "detect_continuity_radii");
  if (delta + kSlack < s.grid->h()) throw usage_error("detect_continuity_radii: delta below lattice resolution");
  if (!(kappa > 0.0)) throw usage_error("detect_continuity_radii: kappa must be > 0");
  ScreenResult out;
  out.analytic = s.has_oracle();
  std::vector<ClosedSet> targets;
  for (double r : candidate_radii) {
    targets.push_back(closed_ball(center, r + delta));
    targets.push_back(closed_ball(center, r - delta));
  }
  std::vector<CapacityEstimate> est;
  if (out.analytic) {
    for (const auto& B : targets) est.push_back(CapacityEstimate::analytic(s.analytic_capacity(B)));
  } else {
    est = estimate_capacities(s, targets, N, seed);
  }
  for (std::size_t i = 0; i < candidate_radii.size(); ++i) {
    ScreenRow row;
    row.radius = candidate_radii[i];
    row.outer = est[2 * i];
    row.inner = est[2 * i + 1];
    row.jump = std::abs(row.outer.value - row.inner.value);
    const double se = std::sqrt(row.outer.std_error * row.outer.std_error + row.inner.std_error * row.inner.std_error);
    row.threshold = kappa + 6.0 * se;
    row.accepted = row.jump <= row.threshold + kSlack;
    if (row.accepted) out.accepted.push_back(row.radius);
    out.rows.push_back(row);
  }
  return out;
}

/// Screen configuration for building the radius ledger against a law.
struct ScreenConfig {
  const SetSampler* sampler = nullptr;
  std::vector<Point> centers;
  double delta = 0.0;
  std::uint64_t N = 0;
  std::uint64_t seed = 0;
  double kappa = 0.02;
};

struct RadiusLedger {
  std::vector<double> base_radii;
  std::vector<double> offsets;
  std::vector<double> candidates;
  std::vector<double> accepted;
  std::vector<double> rejected;
  /// False when the smallest offset is not below the lattice resolution.
  bool offsets_below_resolution = false;
};

/// Candidate radii r + s_k (all k), then r − s_k, per base radius;
/// negative values dropped.
inline std::vector<double> radius_candidates(std::span<const double> base_radii, std::span<const double> offsets) {
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    if (!(offsets[k] > 0.0)) throw usage_error("radius ledger: offsets must be positive");
    if (k > 0 && !(offsets[k] < offsets[k - 1])) throw usage_error("radius ledger: offsets must be decreasing");
  }
  std::vector<double> out;
  for (double r : base_radii) {
    for (double s : offsets) out.push_back(r + s);
    for (double s : offsets) {
      if (r - s >= 0.0) out.push_back(r - s);
    }
  }
  return out;
}

/// D = candidates that pass the continuity screen at every center.
inline RadiusLedger build_D(std::span<const double> base_radii, std::span<const double> offsets,
                            const ScreenConfig& screen) {
  if (!screen.sampler) throw usage_error("build_D: no sampler to screen against");
  RadiusLedger L;
  L.base_radii.assign(base_radii.begin(), base_radii.end());
  L.offsets.assign(offsets.begin(), offsets.end());
  L.candidates = radius_candidates(base_radii, offsets);
  L.offsets_below_resolution = !offsets.empty() && offsets.back() < screen.sampler->grid->h();
  std::vector<std::uint8_t> keep(L.candidates.size(), 1);
  for (std::size_t c = 0; c < screen.centers.size(); ++c) {
    const auto res = detect_continuity_radii(*screen.sampler, screen.centers[c], L.candidates, screen.delta, screen.N,
                                             screen.seed + c, screen.kappa);
    for (std::size_t i = 0; i < res.rows.size(); ++i) keep[i] = keep[i] && res.rows[i].accepted;
  }
  for (std::size_t i = 0; i < L.candidates.size(); ++i) {
    (keep[i] ? L.accepted : L.rejected).push_back(L.candidates[i]);
  }
  if (L.accepted.empty()) throw config_error("build_D: the continuity screen rejected every candidate radius");
  return L;
}

/// A finite union of closed balls with radii from the ledger.
struct DBallUnion {
  std::vector<Ball> balls;

  ClosedSet realize(const GridPtr& grid) const {
    if (balls.empty()) throw usage_error("D-ball union: needs at least one ball");
    ClosedSet out(grid);
    for (const auto& b : balls) out = out.unite(closed_ball(ball_center(grid, b), b.radius));
    return out;
  }

  std::string describe(int dim) const {
    std::string s;
    for (std::size_t i = 0; i < balls.size(); ++i) {
      if (i) s += " + ";
      s += "ball(" + format_double(balls[i].center[0]);
      if (dim == 2) s += "," + format_double(balls[i].center[1]);
      s += "," + format_double(balls[i].radius) + ")";
    }
    return s;
  }
};

/// Panel of `size` U(D) elements: first one ball per center (cycling
/// through accepted radii), then seeded random unions of 1–3 balls.
inline std::vector<DBallUnion> make_ud_panel(const std::vector<Point>& centers, const RadiusLedger& ledger,
                                             std::size_t size, std::uint64_t seed) {
  if (centers.empty()) throw usage_error("U(D) panel: no centers");
  std::vector<DBallUnion> panel;
  const auto& radii = ledger.accepted;
  for (std::size_t i = 0; i < centers.size() && panel.size() < size; ++i) {
    const auto c = centers[i].coords();
    panel.push_back({{Ball{c, radii[i % radii.size()]}}});
  }
  Rng rng = Rng::substream(seed, 0x5eed, 0);
  while (panel.size() < size) {
    DBallUnion u;
    const std::size_t m = 1 + rng.below(3);
    for (std::size_t j = 0; j < m; ++j) {
      const auto c = centers[rng.below(centers.size())].coords();
      u.balls.push_back(Ball{c, radii[rng.below(radii.size())]});
    }
    panel.push_back(std::move(u));
  }
  return panel;
}

}  // namespace epilab
