#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "epilab/argmin.hpp"
#include "epilab/closed_set.hpp"
#include "epilab/lsc.hpp"
#include "epilab/stochastic/rng.hpp"

namespace epilab {

/// A random closed set on the lattice. Replicate r of a sampler is drawn
/// from Rng::substream(seed, stream, r); different sequence positions get
/// different streams, so they behave as independent probability spaces.
struct SetSampler {
  std::string id;
  nlohmann::json params = nlohmann::json::object();
  GridPtr grid;
  std::uint64_t stream = 0;
  std::function<ClosedSet(Rng&)> generator;
  bool deterministic = false;
  /// T(B) = P(C ∩ B ≠ ∅) when known in closed form.
  std::function<double(const ClosedSet&)> analytic_capacity;

  ClosedSet draw(std::uint64_t seed, std::uint64_t replicate) const {
    Rng rng = Rng::substream(seed, stream, replicate);
    return generator(rng);
  }

  bool has_oracle() const noexcept { return static_cast<bool>(analytic_capacity); }

  SetSampler without_oracle() const {
    SetSampler s = *this;
    s.analytic_capacity = nullptr;
    return s;
  }
};

/// A normal integrand: a random lsc function on the lattice. The generator
/// writes one value per lattice point (±inf allowed).
struct IntegrandSampler {
  std::string id;
  nlohmann::json params = nlohmann::json::object();
  GridPtr grid;
  std::uint64_t stream = 0;
  std::function<void(Rng&, std::span<double>)> generator;
  bool deterministic = false;

  // Analytic facts about A(Z, 0), when known.
  bool unique_argmin = false;
  /// Law of the (a.s. unique) minimizer as a pmf over lattice indices.
  std::vector<double> argmin_pmf;
  /// P(Argmin Z ∩ B ≠ ∅).
  std::function<double(const ClosedSet&)> argmin_capacity;

  void draw_into(std::uint64_t seed, std::uint64_t replicate, std::span<double> out) const {
    Rng rng = Rng::substream(seed, stream, replicate);
    generator(rng, out);
  }

  LscFunction draw(std::uint64_t seed, std::uint64_t replicate) const {
    std::vector<double> buf(grid->size());
    draw_into(seed, replicate, buf);
    return to_function(buf);
  }

  LscFunction to_function(std::span<const double> values) const {
    std::vector<ExtReal> v(values.begin(), values.end());
    return LscFunction(grid, std::move(v));
  }
};

namespace detail {

/// Minimum of a sampled function and the members of A(Z, eps).
inline void eps_argmin_values(std::span<const double> z, double eps, std::vector<std::uint32_t>& out) {
  out.clear();
  double m = HUGE_VAL;
  for (double v : z) m = v < m ? v : m;
  if (m == HUGE_VAL) {
    for (std::size_t i = 0; i < z.size(); ++i) out.push_back(static_cast<std::uint32_t>(i));
    return;
  }
  if (m == -HUGE_VAL) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (z[i] == -HUGE_VAL) out.push_back(static_cast<std::uint32_t>(i));
    }
    return;
  }
  const double level = m + eps + kValueSlack * std::max(1.0, std::abs(m));
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] <= level) out.push_back(static_cast<std::uint32_t>(i));
  }
}

}  // namespace detail

/// The random closed set A(Z, eps) induced by an integrand sampler.
inline SetSampler argmin_set_sampler(const IntegrandSampler& z, double eps) {
  SetSampler s;
  s.id = "A(" + z.id + ")";
  s.params = {{"integrand", z.id}, {"eps", eps}};
  s.grid = z.grid;
  s.stream = z.stream;
  s.deterministic = z.deterministic;
  auto gen = z.generator;
  auto grid = z.grid;
  s.generator = [gen, grid, eps](Rng& rng) {
    std::vector<double> buf(grid->size());
    gen(rng, buf);
    std::vector<std::uint32_t> members;
    detail::eps_argmin_values(buf, eps, members);
    return ClosedSet::from_sorted(grid, std::move(members));
  };
  if (eps == 0.0 && z.argmin_capacity) s.analytic_capacity = z.argmin_capacity;
  return s;
}

/// The random singleton {ξ} of a selection ξ ∈ A(Z, eps). The selection
/// draws its randomness after the integrand from the same replicate stream.
inline SetSampler selection_sampler(const IntegrandSampler& z, double eps, SelectionRule rule) {
  SetSampler s;
  s.id = "select(" + z.id + ")";
  s.params = {{"integrand", z.id}, {"eps", eps}, {"rule", std::string(to_string(rule))}};
  s.grid = z.grid;
  s.stream = z.stream;
  s.deterministic = z.deterministic && rule == SelectionRule::lexicographic_min;
  auto gen = z.generator;
  auto grid = z.grid;
  s.generator = [gen, grid, eps, rule](Rng& rng) {
    std::vector<double> buf(grid->size());
    gen(rng, buf);
    std::vector<std::uint32_t> members;
    detail::eps_argmin_values(buf, eps, members);
    const ClosedSet A = ClosedSet::from_sorted(grid, std::move(members));
    const auto pick = static_cast<ClosedSet::index_type>(select_member(A, rule, rng));
    return ClosedSet::from_sorted(grid, {pick});
  };
  return s;
}

/// Deterministic sampler that always returns `set`, with its exact
/// capacity (1 if B hits the set, else 0) as oracle.
inline SetSampler constant_set_sampler(std::string id, const ClosedSet& set) {
  SetSampler s;
  s.id = std::move(id);
  s.grid = set.grid();
  s.deterministic = true;
  s.generator = [set](Rng&) { return set; };
  s.analytic_capacity = [set](const ClosedSet& B) { return hits(set, B) ? 1.0 : 0.0; };
  nlohmann::json members = nlohmann::json::array();
  for (auto i : set.members()) members.push_back(set.grid()->coords(i)[0]);
  s.params = {{"set", members}};
  return s;
}

/// Deterministic integrand equal to f.
inline IntegrandSampler constant_integrand(std::string id, const LscFunction& f) {
  IntegrandSampler z;
  z.id = std::move(id);
  z.grid = f.grid();
  z.deterministic = true;
  std::vector<double> values;
  values.reserve(f.size());
  for (auto v : f.values()) values.push_back(v.value());
  z.generator = [values](Rng&, std::span<double> out) { std::copy(values.begin(), values.end(), out.begin()); };
  const ClosedSet A = argmin(f);
  z.unique_argmin = A.size() == 1;
  z.argmin_capacity = [A](const ClosedSet& B) { return hits(A, B) ? 1.0 : 0.0; };
  if (z.unique_argmin && f.grid()->dim() == 1) {
    z.argmin_pmf.assign(f.size(), 0.0);
    z.argmin_pmf[A.members().front()] = 1.0;
  }
  return z;
}

}  // namespace epilab
