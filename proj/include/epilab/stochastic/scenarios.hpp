#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epilab/stochastic/samplers.hpp"

namespace epilab {

enum class ScenarioKind { sets, integrands };

/// A packaged sequence of random sets or integrands with its limit law.
/// Sequence position i draws from stream i + 1; the limit from stream 0.
struct Scenario {
  std::string id;
  std::string title;
  std::vector<std::string> theorems;
  std::vector<std::string> oracles;
  nlohmann::json params = nlohmann::json::object();
  ScenarioKind kind = ScenarioKind::sets;
  std::vector<std::uint64_t> indices;

  std::vector<SetSampler> set_sequence;
  SetSampler set_limit;

  std::vector<IntegrandSampler> sequence;
  IntegrandSampler limit;
  std::map<std::string, IntegrandSampler> alternative_limits;
  std::vector<double> eps_sequence;
  double eps = 0.0;
  bool epi_convergent = false;

  /// The set sequence, or the argmin sets for integrand scenarios.
  std::vector<SetSampler> sets_view() const {
    if (kind == ScenarioKind::sets) return set_sequence;
    std::vector<SetSampler> out;
    for (std::size_t i = 0; i < sequence.size(); ++i) out.push_back(argmin_set_sampler(sequence[i], eps_sequence[i]));
    return out;
  }
  SetSampler limit_sets_view() const {
    return kind == ScenarioKind::sets ? set_limit : argmin_set_sampler(limit, eps);
  }
};

namespace detail {

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Value added for the second coordinate on 2-d grids, so that every
/// integrand keeps its minimizers on the line nearest to axis-1 zero.
inline std::vector<double> extra_axis_term(const Grid& g) {
  std::vector<double> e(g.size(), 0.0);
  if (g.dim() == 2) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double t1 = g.coord(i, 1);
      e[i] = t1 * t1;
    }
  }
  return e;
}

inline std::vector<double> axis0(const Grid& g) {
  std::vector<double> t(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) t[i] = g.coord(i, 0);
  return t;
}

/// Lattice index on the axis-1 line closest to zero with axis-0 value x.
inline std::size_t line_point(const Grid& g, double x) {
  if (g.dim() == 1) return g.nearest(std::vector<double>{x});
  return g.nearest(std::vector<double>{x, 0.0});
}

/// pmf of nearest-point rounding of a law with cdf F, restricted to the
/// axis-0 line through line_point; mass beyond the window goes to the ends.
template <class Cdf>
std::vector<double> rounded_pmf(const Grid& g, Cdf&& F) {
  std::vector<double> pmf(g.size(), 0.0);
  const std::size_t n0 = g.extent(0);
  for (std::size_t k = 0; k < n0; ++k) {
    const double lo = k == 0 ? -HUGE_VAL : 0.5 * (g.axis_value(0, k - 1) + g.axis_value(0, k));
    const double hi = k + 1 == n0 ? HUGE_VAL : 0.5 * (g.axis_value(0, k) + g.axis_value(0, k + 1));
    const double p = (hi == HUGE_VAL ? 1.0 : F(hi)) - (lo == -HUGE_VAL ? 0.0 : F(lo));
    pmf[line_point(g, g.axis_value(0, k))] += p;
  }
  return pmf;
}

inline std::function<double(const ClosedSet&)> capacity_from_pmf(std::vector<double> pmf) {
  return [pmf = std::move(pmf)](const ClosedSet& B) {
    double s = 0.0;
    for (auto i : B.members()) s += pmf[i];
    return std::min(1.0, s);
  };
}

inline void number_streams(Scenario& s) {
  for (std::size_t i = 0; i < s.set_sequence.size(); ++i) s.set_sequence[i].stream = i + 1;
  for (std::size_t i = 0; i < s.sequence.size(); ++i) s.sequence[i].stream = i + 1;
  s.set_limit.stream = 0;
  s.limit.stream = 0;
  for (auto& [k, z] : s.alternative_limits) z.stream = 0;
}

inline SetSampler point_sampler(const GridPtr& grid, const std::string& id, double x) {
  const ClosedSet c = ClosedSet::from_sorted(grid, {static_cast<ClosedSet::index_type>(line_point(*grid, x))});
  return constant_set_sampler(id, c);
}

inline IntegrandSampler deterministic_integrand(const GridPtr& grid, const std::string& id,
                                                std::vector<double> values) {
  std::vector<ExtReal> v(values.begin(), values.end());
  return constant_integrand(id, LscFunction(grid, std::move(v)));
}

inline Scenario s1_shrinking_singletons(const GridPtr& grid) {
  Scenario s;
  s.id = "S1";
  s.title = "deterministic shrinking singletons C_n = {1/n} -> {0}";
  s.theorems = {"ud-hitting-criterion", "pk-set-limits"};
  s.oracles = {"exact hit indicators"};
  s.params = {{"n", "1..200"}};
  s.kind = ScenarioKind::sets;
  for (std::uint64_t n = 1; n <= 200; ++n) {
    s.indices.push_back(n);
    s.set_sequence.push_back(point_sampler(grid, "C_" + std::to_string(n), 1.0 / static_cast<double>(n)));
  }
  s.set_limit = point_sampler(grid, "C", 0.0);
  return s;
}

inline SetSampler uniform_singleton(const GridPtr& grid, const std::string& id) {
  SetSampler u;
  u.id = id;
  u.grid = grid;
  u.params = {{"law", "uniform[0,1] rounded to the lattice"}};
  u.generator = [grid](Rng& rng) {
    const double x = rng.uniform();
    return ClosedSet::from_sorted(grid, {static_cast<ClosedSet::index_type>(line_point(*grid, x))});
  };
  u.analytic_capacity =
      capacity_from_pmf(rounded_pmf(*grid, [](double x) { return std::clamp(x, 0.0, 1.0); }));
  return u;
}

inline Scenario s2_uniform_singleton(const GridPtr& grid) {
  Scenario s;
  s.id = "S2";
  s.title = "uniform random singleton on [0,1], identical laws";
  s.theorems = {"capacity-functional", "inclusion-exclusion", "ud-hitting-criterion"};
  s.oracles = {"analytic capacity (cell-overlap formula)"};
  s.params = {{"n", "1..20"}};
  s.kind = ScenarioKind::sets;
  for (std::uint64_t n = 1; n <= 20; ++n) {
    s.indices.push_back(n);
    s.set_sequence.push_back(uniform_singleton(grid, "U_" + std::to_string(n)));
  }
  s.set_limit = uniform_singleton(grid, "U");
  return s;
}

inline Scenario s3_random_quadratics(const GridPtr& grid) {
  Scenario s;
  s.id = "S3";
  s.title = "random quadratics Z_n(t) = t^2 - 2tW_n, W_n standardized uniform sums -> N(0,1)";
  s.theorems = {"epi-distribution-criterion", "argmin-upper-fell", "argmin-fell-unique"};
  s.oracles = {"argmin law = rounded N(0,1)", "argmin capacity"};
  s.params = {{"n", "1..20"}, {"W_n", "sqrt(12/n) * sum_{i<=n} (U_i - 1/2), rounded to the lattice"}};
  s.kind = ScenarioKind::integrands;
  const Grid& g = *grid;
  auto t = std::make_shared<const std::vector<double>>(axis0(g));
  auto extra = std::make_shared<const std::vector<double>>(extra_axis_term(g));
  auto quad = [grid, t, extra](double w, std::span<double> out) {
    const double wl = grid->axis_value(0, grid->cell(line_point(*grid, w))[0]);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*t)[i] * ((*t)[i] - 2.0 * wl) + (*extra)[i];
  };
  const auto pmf = rounded_pmf(g, std_normal_cdf);
  for (std::uint64_t n = 1; n <= 20; ++n) {
    IntegrandSampler z;
    z.id = "Z_" + std::to_string(n);
    z.grid = grid;
    z.params = {{"n", n}};
    const double scale = std::sqrt(12.0 / static_cast<double>(n));
    z.generator = [quad, n, scale](Rng& rng, std::span<double> out) {
      double sum = 0.0;
      for (std::uint64_t i = 0; i < n; ++i) sum += rng.uniform() - 0.5;
      quad(scale * sum, out);
    };
    z.unique_argmin = true;
    s.indices.push_back(n);
    s.sequence.push_back(std::move(z));
  }
  IntegrandSampler lim;
  lim.id = "Z";
  lim.grid = grid;
  lim.params = {{"W", "N(0,1) rounded to the lattice"}};
  lim.generator = [quad](Rng& rng, std::span<double> out) { quad(rng.normal(), out); };
  lim.unique_argmin = true;
  lim.argmin_pmf = pmf;
  lim.argmin_capacity = capacity_from_pmf(pmf);
  s.limit = std::move(lim);
  s.eps_sequence.assign(s.sequence.size(), 0.0);
  s.epi_convergent = true;
  return s;
}

inline Scenario s4_double_well(const GridPtr& grid) {
  Scenario s;
  s.id = "S4";
  s.title = "double well (t^2-1)^2 with vanishing random tilt +-t/n";
  s.theorems = {"argmin-upper-fell", "selection-portmanteau", "inclusion-exclusion"};
  s.oracles = {"limit argmin {-1, 1}", "limit capacity: 1 iff F hits {-1, 1}"};
  s.params = {{"n", "1..20"}, {"tilt", "sigma * t / n, sigma = +-1 equiprobable"}};
  s.kind = ScenarioKind::integrands;
  const Grid& g = *grid;
  auto t = std::make_shared<const std::vector<double>>(axis0(g));
  std::vector<double> base0 = extra_axis_term(g);
  for (std::size_t i = 0; i < base0.size(); ++i) {
    const double u = (*t)[i] * (*t)[i] - 1.0;
    base0[i] += u * u;
  }
  auto base = std::make_shared<const std::vector<double>>(base0);
  for (std::uint64_t n = 1; n <= 20; ++n) {
    IntegrandSampler z;
    z.id = "Z_" + std::to_string(n);
    z.grid = grid;
    z.params = {{"n", n}};
    const double eta = 1.0 / static_cast<double>(n);
    z.generator = [t, base, eta](Rng& rng, std::span<double> out) {
      const double tilt = (rng() >> 63) ? eta : -eta;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*base)[i] + tilt * (*t)[i];
    };
    z.unique_argmin = true;
    s.indices.push_back(n);
    s.sequence.push_back(std::move(z));
  }
  s.limit = deterministic_integrand(grid, "Z", base0);
  s.eps_sequence.assign(s.sequence.size(), 0.0);
  s.epi_convergent = true;
  return s;
}

inline Scenario s5_localized_dips(const GridPtr& grid) {
  Scenario s;
  s.id = "S5";
  s.title = "localized dips f_n = -1 at 1/n, 0 elsewhere; epi-limit dips at 0";
  s.theorems = {"epi-convergence", "eps-argmin-inclusion", "argmin-upper-fell"};
  s.oracles = {"exact epigraph limits"};
  s.params = {{"n", "1..200"}};
  s.kind = ScenarioKind::integrands;
  const Grid& g = *grid;
  const auto extra = extra_axis_term(g);
  auto dip = [&](double x) {
    std::vector<double> v = extra;
    v[line_point(g, x)] += -1.0;
    return v;
  };
  for (std::uint64_t n = 1; n <= 200; ++n) {
    s.indices.push_back(n);
    s.sequence.push_back(deterministic_integrand(grid, "f_" + std::to_string(n), dip(1.0 / static_cast<double>(n))));
  }
  s.limit = deterministic_integrand(grid, "g", dip(0.0));
  s.alternative_limits.emplace("zero", deterministic_integrand(grid, "h", extra));
  s.eps_sequence.assign(s.sequence.size(), 0.0);
  s.epi_convergent = true;
  return s;
}

inline Scenario s6_oscillation(const GridPtr& grid) {
  Scenario s;
  s.id = "S6";
  s.title = "oscillating integrands sin(nt + Theta), epi-limit -1";
  s.theorems = {"epi-distribution-criterion", "argmin-upper-fell"};
  s.oracles = {"deterministic epi-limit -1"};
  s.params = {{"n", "1..20"}, {"Theta", "uniform[0, 2pi)"}};
  s.kind = ScenarioKind::integrands;
  const Grid& g = *grid;
  auto extra = std::make_shared<const std::vector<double>>(extra_axis_term(g));
  const std::size_t n0 = g.extent(0);
  const double lo = g.axis_value(0, 0);
  const double h = g.h();
  for (std::uint64_t n = 1; n <= 20; ++n) {
    IntegrandSampler z;
    z.id = "Z_" + std::to_string(n);
    z.grid = grid;
    z.params = {{"n", n}};
    const double w = static_cast<double>(n);
    z.generator = [grid, extra, n0, lo, h, w](Rng& rng, std::span<double> out) {
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      // Rotate (cos, sin) of the phase one lattice step at a time.
      const double c = std::cos(w * h);
      const double sn = std::sin(w * h);
      double re = std::cos(w * lo + theta);
      double im = std::sin(w * lo + theta);
      const std::size_t stride = grid->dim() == 2 ? grid->extent(1) : 1;
      for (std::size_t k = 0; k < n0; ++k) {
        for (std::size_t j = 0; j < stride; ++j) out[k * stride + j] = im + (*extra)[k * stride + j];
        const double r2 = re * c - im * sn;
        im = re * sn + im * c;
        re = r2;
      }
    };
    s.indices.push_back(n);
    s.sequence.push_back(std::move(z));
  }
  std::vector<double> minus_one = *extra;
  for (auto& v : minus_one) v -= 1.0;
  s.limit = deterministic_integrand(grid, "Z", minus_one);
  s.alternative_limits.emplace("zero", deterministic_integrand(grid, "zero", *extra));
  s.eps_sequence.assign(s.sequence.size(), 0.0);
  s.epi_convergent = true;
  return s;
}

inline Scenario s7_shifted_noise(const GridPtr& grid) {
  Scenario s;
  s.id = "S7";
  s.title = "shifted quadratics (t - 1/n)^2 + G_n, G_n ~ N(1/n, 1) -> t^2 + G";
  s.theorems = {"epi-distribution-criterion", "argmin-upper-fell"};
  s.oracles = {"limit argmin {0}"};
  s.params = {{"n", "10, 20, ..., 200"}};
  s.kind = ScenarioKind::integrands;
  const Grid& g = *grid;
  auto t = std::make_shared<const std::vector<double>>(axis0(g));
  auto extra = std::make_shared<const std::vector<double>>(extra_axis_term(g));
  auto make = [&](std::string id, double shift) {
    IntegrandSampler z;
    z.id = std::move(id);
    z.grid = grid;
    z.params = {{"shift", shift}};
    z.generator = [t, extra, shift](Rng& rng, std::span<double> out) {
      const double G = shift + rng.normal();
      for (std::size_t i = 0; i < out.size(); ++i) {
        const double d = (*t)[i] - shift;
        out[i] = d * d + G + (*extra)[i];
      }
    };
    return z;
  };
  for (std::uint64_t j = 1; j <= 20; ++j) {
    const std::uint64_t n = 10 * j;
    s.indices.push_back(n);
    s.sequence.push_back(make("Z_" + std::to_string(n), 1.0 / static_cast<double>(n)));
  }
  IntegrandSampler lim = make("Z", 0.0);
  const std::size_t at = line_point(g, 0.0);
  lim.unique_argmin = true;
  lim.argmin_pmf.assign(g.size(), 0.0);
  lim.argmin_pmf[at] = 1.0;
  lim.argmin_capacity = capacity_from_pmf(lim.argmin_pmf);
  s.limit = std::move(lim);
  s.eps_sequence.assign(s.sequence.size(), 0.0);
  s.epi_convergent = true;
  return s;
}

inline Scenario alternating_singletons(const GridPtr& grid) {
  Scenario s;
  s.id = "alternating";
  s.title = "alternating singletons {-1}, {1}; not convergent";
  s.theorems = {"ud-hitting-criterion"};
  s.oracles = {"exact hit indicators"};
  s.params = {{"n", "1..200"}};
  s.kind = ScenarioKind::sets;
  for (std::uint64_t n = 1; n <= 200; ++n) {
    s.indices.push_back(n);
    s.set_sequence.push_back(point_sampler(grid, "C_" + std::to_string(n), n % 2 == 1 ? -1.0 : 1.0));
  }
  s.set_limit = point_sampler(grid, "C", 1.0);
  return s;
}

inline Scenario atom(const GridPtr& grid) {
  Scenario s;
  s.id = "atom";
  s.title = "deterministic atom C = {0.5}";
  s.theorems = {"continuity-screen"};
  s.oracles = {"step-function capacity"};
  s.params = {{"n", "1..20"}};
  s.kind = ScenarioKind::sets;
  for (std::uint64_t n = 1; n <= 20; ++n) {
    s.indices.push_back(n);
    s.set_sequence.push_back(point_sampler(grid, "C_" + std::to_string(n), 0.5));
  }
  s.set_limit = point_sampler(grid, "C", 0.5);
  return s;
}

}  // namespace detail

/// The built-in scenarios on `grid`, sorted by id.
inline std::vector<Scenario> scenario_library(const GridPtr& grid) {
  std::vector<Scenario> lib;
  lib.push_back(detail::s1_shrinking_singletons(grid));
  lib.push_back(detail::s2_uniform_singleton(grid));
  lib.push_back(detail::s3_random_quadratics(grid));
  lib.push_back(detail::s4_double_well(grid));
  lib.push_back(detail::s5_localized_dips(grid));
  lib.push_back(detail::s6_oscillation(grid));
  lib.push_back(detail::s7_shifted_noise(grid));
  lib.push_back(detail::alternating_singletons(grid));
  lib.push_back(detail::atom(grid));
  for (auto& s : lib) detail::number_streams(s);
  std::sort(lib.begin(), lib.end(), [](const Scenario& a, const Scenario& b) { return a.id < b.id; });
  return lib;
}

inline Scenario find_scenario(const std::vector<Scenario>& lib, const std::string& id) {
  for (const auto& s : lib) {
    if (s.id == id) return s;
  }
  throw config_error("unknown scenario '" + id + "'");
}

}  // namespace epilab
