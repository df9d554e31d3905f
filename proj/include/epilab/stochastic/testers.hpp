#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epilab/argmin.hpp"
#include "epilab/stochastic/capacity.hpp"
#include "epilab/stochastic/samplers.hpp"
#include "epilab/verdict.hpp"

namespace epilab {

/// A named target set of a panel.
struct PanelSet {
  std::string id;
  std::string description;
  ClosedSet set;
};

/// A named finite collection K* of compact targets; the event is that the
/// random set hits every member.
struct KCollection {
  std::string id;
  std::string description;
  std::vector<ClosedSet> sets;
};

/// One constraint I_{ball(x, r)} ≤ r + alpha (mode le) or > r + alpha
/// (mode gt) of an epigraph panel tuple.
struct EpiComponent {
  std::array<double, 2> x{0.0, 0.0};
  double r = 0.0;
  double alpha = 0.0;
};

struct EpiTuple {
  std::string id;
  std::vector<EpiComponent> components;
};

enum class EpiMode { le, gt };

inline std::string_view to_string(EpiMode m) noexcept { return m == EpiMode::le ? "le" : "gt"; }

enum class Comparison { two_sided, one_sided, lower_bound };

inline std::string_view to_string(Comparison c) noexcept {
  switch (c) {
    case Comparison::two_sided:
      return "two-sided";
    case Comparison::one_sided:
      return "one-sided";
    case Comparison::lower_bound:
      return "lower-bound";
  }
  return "two-sided";
}

struct PanelResult {
  std::string id;
  std::string description;
  std::vector<CapacityEstimate> sequence;  // one per sequence position
  CapacityEstimate limit;
  double max_discrepancy = 0.0;
  double max_adjusted = 0.0;
  bool excluded = false;
  std::string note;
};

/// Structured outcome of a convergence tester. Over the tail window the
/// raw discrepancy of each panel element is |p_n − p| (two-sided), p_n − p
/// (one-sided) or p − p_n (lower bound); the adjusted discrepancy subtracts
/// 3·(SE_n + SE). verdict = pass iff the largest adjusted discrepancy is at
/// most `threshold`.
struct TestReport {
  std::string tester;
  std::string scenario;
  Verdict verdict = Verdict::fail;
  std::uint64_t N = 0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::vector<std::uint64_t> indices;
  std::size_t tail_start = 0;
  Comparison comparison = Comparison::two_sided;
  std::vector<PanelResult> panels;
  double max_discrepancy = 0.0;
  double max_adjusted_discrepancy = 0.0;
  double threshold = 0.0;
  nlohmann::json diagnostics = nlohmann::json::object();
};

namespace detail {

inline std::size_t tail_of(std::size_t len) { return len / 2; }

inline std::vector<std::uint64_t> default_indices(std::size_t len) {
  std::vector<std::uint64_t> v(len);
  for (std::size_t i = 0; i < len; ++i) v[i] = i + 1;
  return v;
}

inline double discrepancy(Comparison c, double seq, double lim) {
  switch (c) {
    case Comparison::two_sided:
      return std::abs(seq - lim);
    case Comparison::one_sided:
      return seq - lim;
    case Comparison::lower_bound:
      return lim - seq;
  }
  return 0.0;
}

/// Fills the per-panel and overall maxima and sets the verdict.
inline void score(TestReport& rep) {
  bool any = false;
  for (auto& p : rep.panels) {
    if (p.excluded) continue;
    bool first = true;
    for (std::size_t n = rep.tail_start; n < p.sequence.size(); ++n) {
      const double raw = discrepancy(rep.comparison, p.sequence[n].value, p.limit.value);
      const double adj = raw - 3.0 * (p.sequence[n].std_error + p.limit.std_error);
      if (first || raw > p.max_discrepancy) p.max_discrepancy = raw;
      if (first || adj > p.max_adjusted) p.max_adjusted = adj;
      first = false;
    }
    if (first) continue;
    if (!any || p.max_discrepancy > rep.max_discrepancy) rep.max_discrepancy = p.max_discrepancy;
    if (!any || p.max_adjusted > rep.max_adjusted_discrepancy) rep.max_adjusted_discrepancy = p.max_adjusted;
    any = true;
  }
  if (!any) {
    rep.verdict = Verdict::fail;
    rep.diagnostics["note"] = "no usable panel element";
    return;
  }
  rep.verdict = rep.max_adjusted_discrepancy <= rep.threshold + kSlack ? Verdict::pass : Verdict::fail;
}

inline TestReport make_report(std::string tester, std::size_t len, std::uint64_t N, std::uint64_t seed, double tol,
                              Comparison cmp) {
  if (len == 0) throw usage_error(tester + ": empty sequence");
  if (N == 0) throw usage_error(tester + ": N must be >= 1");
  TestReport rep;
  rep.tester = std::move(tester);
  rep.N = N;
  rep.seed = seed;
  rep.tol = tol;
  rep.threshold = tol;
  rep.indices = default_indices(len);
  rep.tail_start = tail_of(len);
  rep.comparison = cmp;
  return rep;
}

/// Counts events over replicates of an integrand; fn(z, rng, flags) sees
/// the sampled values and the replicate stream positioned after the draw.
template <class Fn>
std::vector<std::uint64_t> count_integrand_events(const IntegrandSampler& z, std::size_t n_events, std::uint64_t N,
                                                  std::uint64_t seed, bool deterministic, Fn&& fn) {
  std::vector<double> buf(z.grid->size());
  return count_events(n_events, N, deterministic, [&](std::uint64_t r, auto& flags) {
    Rng rng = Rng::substream(seed, z.stream, r);
    z.generator(rng, buf);
    fn(std::span<const double>(buf), rng, flags);
  });
}

inline bool any_member_in(std::span<const std::uint32_t> members, const SetMask<CarrierSpace>& K) {
  for (auto i : members) {
    if (K.test(i)) return true;
  }
  return false;
}

inline double min_over(std::span<const double> z, std::span<const std::uint32_t> idx) {
  double m = HUGE_VAL;
  for (auto i : idx) m = z[i] < m ? z[i] : m;
  return m;
}

inline void check_eps(std::span<const double> eps_seq, std::size_t len, const char* who) {
  if (eps_seq.size() != len) throw usage_error(std::string(who) + ": eps sequence length mismatch");
  for (double e : eps_seq) {
    if (!(e >= 0.0)) throw usage_error(std::string(who) + ": eps values must be >= 0");
  }
}

inline std::vector<SetMask<CarrierSpace>> masks_of(std::span<const ClosedSet> sets) {
  std::vector<SetMask<CarrierSpace>> m;
  m.reserve(sets.size());
  for (const auto& s : sets) m.emplace_back(s);
  return m;
}

}  // namespace detail

inline std::vector<PanelSet> realize_panel(std::span<const DBallUnion> panel, const GridPtr& grid) {
  std::vector<PanelSet> out;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    out.push_back({"U" + std::to_string(i + 1), panel[i].describe(grid->dim()), panel[i].realize(grid)});
  }
  return out;
}

/// Hitting probabilities P_n(C_n ∩ U ≠ ∅) along the sequence against
/// P(C ∩ U ≠ ∅), two-sided, for every U of the panel.
inline TestReport test_rcs_convergence(std::span<const SetSampler> seq, const SetSampler& limit,
                                       std::span<const PanelSet> panel, std::uint64_t N, std::uint64_t seed,
                                       double tol) {
  TestReport rep = detail::make_report("rcs-convergence", seq.size(), N, seed, tol, Comparison::two_sided);
  std::vector<ClosedSet> targets;
  for (const auto& p : panel) targets.push_back(p.set);
  for (const auto& p : panel) rep.panels.push_back({p.id, p.description, {}, {}, 0.0, 0.0, false, {}});
  for (const auto& s : seq) {
    const auto est = estimate_capacities(s, targets, N, seed);
    for (std::size_t j = 0; j < panel.size(); ++j) rep.panels[j].sequence.push_back(est[j]);
  }
  const auto lim = estimate_capacities(limit, targets, N, seed);
  for (std::size_t j = 0; j < panel.size(); ++j) {
    rep.panels[j].limit = lim[j];
    if (limit.has_oracle()) rep.panels[j].note = "analytic " + format_double(limit.analytic_capacity(targets[j]));
  }
  detail::score(rep);
  return rep;
}

namespace detail {

/// Distinct balls of an epigraph panel with their closed and open member
/// lists.
struct BallTable {
  std::vector<std::vector<std::uint32_t>> closed;
  std::vector<std::vector<std::uint32_t>> open;
  std::vector<std::vector<std::size_t>> tuple_balls;  // per tuple, per component
  std::vector<std::vector<double>> tuple_levels;      // r + alpha

  BallTable(const GridPtr& grid, std::span<const EpiTuple> panel) {
    for (const auto& t : panel) {
      if (t.components.empty()) throw usage_error("epi panel: tuple '" + t.id + "' has no components");
      std::vector<std::size_t> balls;
      std::vector<double> levels;
      for (const auto& c : t.components) {
        if (!(c.r > 0.0)) throw usage_error("epi panel: radii must be positive");
        const Point x = ball_center(grid, Ball{c.x, c.r});
        balls.push_back(closed.size());
        levels.push_back(c.r + c.alpha);
        const auto cs = closed_ball(x, c.r);
        const auto os = open_ball(x, c.r);
        closed.emplace_back(cs.members().begin(), cs.members().end());
        open.emplace_back(os.members().begin(), os.members().end());
      }
      tuple_balls.push_back(std::move(balls));
      tuple_levels.push_back(std::move(levels));
    }
  }
};

}  // namespace detail

/// Joint infimum events over balls, sequence (closed balls) against the
/// limit (interiors), two-sided. Tuples whose components fail the
/// continuity screen P(I_closed ≤ c) ≈ P(I_open < c) under the limit are
/// excluded and reported. Both modes are evaluated on the same replicates;
/// the requested one decides the verdict.
inline TestReport test_epi_convergence_dist(std::span<const IntegrandSampler> seq, const IntegrandSampler& limit,
                                            std::span<const EpiTuple> panel, std::uint64_t N, std::uint64_t seed,
                                            double tol, EpiMode mode, double kappa = 0.02) {
  TestReport rep = detail::make_report("epi-dist", seq.size(), N, seed, tol, Comparison::two_sided);
  const detail::BallTable table(limit.grid, panel);
  const std::size_t T = panel.size();
  const std::size_t B = table.closed.size();

  // Continuity screen of every component under the limit law.
  std::vector<double> comp_levels;
  std::vector<std::size_t> comp_ball;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < table.tuple_balls[t].size(); ++k) {
      comp_ball.push_back(table.tuple_balls[t][k]);
      comp_levels.push_back(table.tuple_levels[t][k]);
    }
  }
  const std::size_t C = comp_ball.size();
  const auto screen_counts = detail::count_integrand_events(
      limit, 2 * C, N, seed ^ 0x9E3779B97F4A7C15ULL, limit.deterministic, [&](auto z, Rng&, auto& flags) {
        for (std::size_t c = 0; c < C; ++c) {
          const double ic = detail::min_over(z, table.closed[comp_ball[c]]);
          const double io = detail::min_over(z, table.open[comp_ball[c]]);
          flags[2 * c] = ic <= comp_levels[c] + kSlack;
          flags[2 * c + 1] = io < comp_levels[c] - kSlack;
        }
      });
  const auto screen = detail::to_estimates(screen_counts, N, limit.deterministic);
  std::vector<std::uint8_t> tuple_ok(T, 1);
  nlohmann::json screen_rows = nlohmann::json::array();
  {
    std::size_t c = 0;
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t k = 0; k < table.tuple_balls[t].size(); ++k, ++c) {
        const auto& a = screen[2 * c];
        const auto& b = screen[2 * c + 1];
        const double jump = std::abs(a.value - b.value);
        const double thr = kappa + 6.0 * std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
        const bool ok = jump <= thr + kSlack;
        if (!ok) tuple_ok[t] = 0;
        screen_rows.push_back({{"tuple", panel[t].id},
                               {"component", k},
                               {"p_closed_le", a.value},
                               {"p_open_lt", b.value},
                               {"jump", jump},
                               {"threshold", thr},
                               {"accepted", ok}});
      }
    }
  }
  rep.diagnostics["continuity_screen"] = screen_rows;
  rep.diagnostics["mode"] = std::string(to_string(mode));

  // Events: [le_0..le_{T-1}, gt_0..gt_{T-1}].
  auto evaluate = [&](std::span<const double> z, const std::vector<std::vector<std::uint32_t>>& balls, auto& flags) {
    std::vector<double> inf(B);
    for (std::size_t b = 0; b < B; ++b) inf[b] = detail::min_over(z, balls[b]);
    for (std::size_t t = 0; t < T; ++t) {
      bool all_le = true;
      bool all_gt = true;
      for (std::size_t k = 0; k < table.tuple_balls[t].size(); ++k) {
        const double v = inf[table.tuple_balls[t][k]];
        const bool le = v <= table.tuple_levels[t][k] + kSlack;
        all_le = all_le && le;
        all_gt = all_gt && !le;
      }
      flags[t] = all_le;
      flags[T + t] = all_gt;
    }
  };

  std::vector<std::vector<CapacityEstimate>> per_index;
  for (const auto& s : seq) {
    const auto counts = detail::count_integrand_events(
        s, 2 * T, N, seed, s.deterministic, [&](auto z, Rng&, auto& flags) { evaluate(z, table.closed, flags); });
    per_index.push_back(detail::to_estimates(counts, N, s.deterministic));
  }
  const auto lim_counts = detail::count_integrand_events(
      limit, 2 * T, N, seed, limit.deterministic, [&](auto z, Rng&, auto& flags) { evaluate(z, table.open, flags); });
  const auto lim = detail::to_estimates(lim_counts, N, limit.deterministic);

  auto build = [&](EpiMode m) {
    TestReport r = rep;
    r.panels.clear();
    const std::size_t off = m == EpiMode::le ? 0 : T;
    for (std::size_t t = 0; t < T; ++t) {
      PanelResult p;
      p.id = panel[t].id;
      for (const auto& c : panel[t].components) {
        if (!p.description.empty()) p.description += " & ";
        p.description += "(" + format_double(c.x[0]) + "," + format_double(c.r) + "," + format_double(c.alpha) + ")";
      }
      for (const auto& e : per_index) p.sequence.push_back(e[off + t]);
      p.limit = lim[off + t];
      if (!tuple_ok[t]) {
        p.excluded = true;
        p.note = "failed continuity screen";
      }
      r.panels.push_back(std::move(p));
    }
    detail::score(r);
    return r;
  };
  TestReport le = build(EpiMode::le);
  TestReport gt = build(EpiMode::gt);

  // Single-event tuples: le and gt counts are complementary per replicate.
  bool complement = true;
  for (std::size_t t = 0; t < T; ++t) {
    if (panel[t].components.size() != 1) continue;
    for (const auto& e : per_index) complement = complement && e[t].count + e[T + t].count == N;
    complement = complement && lim[t].count + lim[T + t].count == N;
  }
  TestReport out = mode == EpiMode::le ? std::move(le) : std::move(gt);
  out.diagnostics["verdict_le"] = std::string(to_string((mode == EpiMode::le ? out : le).verdict));
  out.diagnostics["verdict_gt"] = std::string(to_string((mode == EpiMode::gt ? out : gt).verdict));
  out.diagnostics["complement_exact"] = complement;
  return out;
}

/// P_n(A(Z_n, ε_n) hits every K in K*) along the tail against the limit's
/// P(A(Z, ε) hits every K in K*), one-sided (limsup ≤).
inline TestReport test_argmin_upper_fell(std::span<const IntegrandSampler> seq, std::span<const double> eps_seq,
                                         const IntegrandSampler& limit, double eps,
                                         std::span<const KCollection> K_panel, std::uint64_t N, std::uint64_t seed,
                                         double tol) {
  TestReport rep = detail::make_report("argmin-upper-fell", seq.size(), N, seed, tol, Comparison::one_sided);
  detail::check_eps(eps_seq, seq.size(), "argmin-upper-fell");
  std::vector<std::vector<SetMask<CarrierSpace>>> masks;
  for (const auto& k : K_panel) {
    if (k.sets.empty()) throw usage_error("K panel: collection '" + k.id + "' is empty");
    masks.push_back(detail::masks_of(k.sets));
  }
  const std::size_t P = K_panel.size();
  std::vector<std::uint32_t> members;
  auto run = [&](const IntegrandSampler& z, double e) {
    const auto counts = detail::count_integrand_events(z, P, N, seed, z.deterministic, [&](auto v, Rng&, auto& flags) {
      detail::eps_argmin_values(v, e, members);
      for (std::size_t p = 0; p < P; ++p) {
        bool all = true;
        for (const auto& K : masks[p]) all = all && detail::any_member_in(members, K);
        flags[p] = all;
      }
    });
    return detail::to_estimates(counts, N, z.deterministic);
  };
  for (std::size_t p = 0; p < P; ++p) rep.panels.push_back({K_panel[p].id, K_panel[p].description, {}, {}, 0, 0, false, {}});
  for (std::size_t n = 0; n < seq.size(); ++n) {
    const auto est = run(seq[n], eps_seq[n]);
    for (std::size_t p = 0; p < P; ++p) rep.panels[p].sequence.push_back(est[p]);
  }
  const auto lim = run(limit, eps);
  for (std::size_t p = 0; p < P; ++p) rep.panels[p].limit = lim[p];
  rep.diagnostics["eps"] = eps;
  detail::score(rep);
  return rep;
}

/// liminf over the tail of P_n(∅ ≠ A(Z_n, ε_n) ⊆ K) must reach
/// 1 − eta − 3·SE.
inline TestReport test_tightness(std::span<const IntegrandSampler> seq, std::span<const double> eps_seq,
                                 const ClosedSet& K, std::uint64_t N, std::uint64_t seed, double eta) {
  TestReport rep = detail::make_report("tightness", seq.size(), N, seed, 0.0, Comparison::lower_bound);
  detail::check_eps(eps_seq, seq.size(), "tightness");
  if (!(eta >= 0.0 && eta < 1.0)) throw usage_error("tightness: eta must lie in [0, 1)");
  const SetMask<CarrierSpace> mask(K);
  PanelResult p;
  p.id = "K";
  p.description = std::to_string(K.size()) + " lattice points";
  p.limit = CapacityEstimate::analytic(1.0 - eta);
  std::vector<std::uint32_t> members;
  for (std::size_t n = 0; n < seq.size(); ++n) {
    const auto counts =
        detail::count_integrand_events(seq[n], 1, N, seed, seq[n].deterministic, [&](auto v, Rng&, auto& flags) {
          detail::eps_argmin_values(v, eps_seq[n], members);
          bool inside = !members.empty();
          for (auto i : members) inside = inside && mask.test(i);
          flags[0] = inside;
        });
    p.sequence.push_back(detail::to_estimates(counts, N, seq[n].deterministic).front());
  }
  rep.panels.push_back(std::move(p));
  rep.diagnostics["eta"] = eta;
  detail::score(rep);
  return rep;
}

struct ArgminFellOptions {
  double eta = 0.01;
  double ks_tol = 0.02;
};

/// Argmin convergence in the Fell topology under tightness and an a.s.
/// unique limit minimizer. Combines: tightness (hypothesis), the one-sided
/// K-panel check, two-sided hitting probabilities of the argmin sets on a
/// U(D) panel and, when the limit law of the minimizer is known, the
/// Kolmogorov–Smirnov distance of the selected minimizer at the last index.
inline TestReport test_argmin_fell(std::span<const IntegrandSampler> seq, std::span<const double> eps_seq,
                                   const IntegrandSampler& limit, const ClosedSet& K,
                                   std::span<const KCollection> K_panel, std::span<const PanelSet> U_panel,
                                   std::uint64_t N, std::uint64_t seed, double tol, const ArgminFellOptions& opt = {}) {
  TestReport rep = detail::make_report("argmin-fell", seq.size(), N, seed, tol, Comparison::two_sided);
  detail::check_eps(eps_seq, seq.size(), "argmin-fell");
  nlohmann::json hyp = nlohmann::json::object();
  hyp["limit_unique_argmin"] = limit.unique_argmin;
  double eps_tail = 0.0;
  for (std::size_t n = rep.tail_start; n < seq.size(); ++n) eps_tail = std::max(eps_tail, eps_seq[n]);
  hyp["eps_tail_sup"] = eps_tail;
  hyp["eps_ok"] = eps_tail <= tol + kSlack;
  if (!limit.unique_argmin || eps_tail > tol + kSlack) {
    rep.verdict = Verdict::hypothesis_not_met;
    rep.diagnostics["hypotheses"] = hyp;
    rep.diagnostics["note"] = !limit.unique_argmin ? "limit minimizer is not almost surely unique"
                                                   : "eps sequence does not converge to 0";
    return rep;
  }

  const TestReport tight = test_tightness(seq, eps_seq, K, N, seed, opt.eta);
  hyp["tightness"] = std::string(to_string(tight.verdict));
  hyp["tightness_worst_shortfall"] = tight.max_discrepancy;
  if (tight.verdict != Verdict::pass) {
    rep.verdict = Verdict::hypothesis_not_met;
    rep.diagnostics["hypotheses"] = hyp;
    rep.diagnostics["note"] = "argmin sets are not tight in K";
    return rep;
  }

  const TestReport upper = test_argmin_upper_fell(seq, eps_seq, limit, 0.0, K_panel, N, seed, tol);

  // Two-sided hitting probabilities of the argmin sets on the U(D) panel,
  // plus the law of the lexicographic-min selection at the last index.
  std::vector<ClosedSet> targets;
  for (const auto& u : U_panel) targets.push_back(u.set);
  const auto umasks = detail::masks_of(targets);
  const std::size_t P = U_panel.size();
  const Grid& g = *limit.grid;
  const std::size_t n0 = g.extent(0);
  std::vector<std::uint64_t> histogram(n0, 0);
  std::vector<std::uint32_t> members;
  for (const auto& u : U_panel) rep.panels.push_back({u.id, u.description, {}, {}, 0, 0, false, {}});
  for (std::size_t n = 0; n < seq.size(); ++n) {
    const bool last = n + 1 == seq.size();
    const auto counts =
        detail::count_integrand_events(seq[n], P, N, seed, seq[n].deterministic, [&](auto v, Rng&, auto& flags) {
          detail::eps_argmin_values(v, eps_seq[n], members);
          for (std::size_t p = 0; p < P; ++p) flags[p] = detail::any_member_in(members, umasks[p]);
          if (last && !members.empty()) ++histogram[g.cell(members.front())[0]];
        });
    const auto est = detail::to_estimates(counts, N, seq[n].deterministic);
    for (std::size_t p = 0; p < P; ++p) rep.panels[p].sequence.push_back(est[p]);
    if (last && seq[n].deterministic) {
      for (auto& h : histogram) h *= N;
    }
  }
  if (limit.argmin_capacity) {
    for (std::size_t p = 0; p < P; ++p) rep.panels[p].limit = CapacityEstimate::analytic(limit.argmin_capacity(targets[p]));
  } else {
    const SetSampler lim_sets = argmin_set_sampler(limit, 0.0);
    const auto lim = estimate_capacities(lim_sets, targets, N, seed);
    for (std::size_t p = 0; p < P; ++p) rep.panels[p].limit = lim[p];
  }
  detail::score(rep);
  const Verdict ud_verdict = rep.verdict;

  nlohmann::json ks = nlohmann::json::object();
  bool ks_ok = true;
  if (!limit.argmin_pmf.empty()) {
    std::vector<double> marginal(n0, 0.0);
    for (std::size_t i = 0; i < limit.argmin_pmf.size(); ++i) marginal[g.cell(i)[0]] += limit.argmin_pmf[i];
    double F = 0.0;
    double Fhat = 0.0;
    double d = 0.0;
    std::size_t at = 0;
    for (std::size_t k = 0; k < n0; ++k) {
      F += marginal[k];
      Fhat += static_cast<double>(histogram[k]) / static_cast<double>(N);
      if (std::abs(F - Fhat) > d) {
        d = std::abs(F - Fhat);
        at = k;
      }
    }
    ks_ok = d <= opt.ks_tol;
    ks = {{"distance", d},
          {"at", g.axis_value(0, at)},
          {"tol", opt.ks_tol},
          {"index", rep.indices.back()},
          {"pass", ks_ok}};
  } else {
    ks = {{"note", "no analytic limit law"}};
  }

  rep.diagnostics["hypotheses"] = hyp;
  rep.diagnostics["upper_fell"] = {{"verdict", std::string(to_string(upper.verdict))},
                                   {"max_discrepancy", upper.max_discrepancy},
                                   {"max_adjusted_discrepancy", upper.max_adjusted_discrepancy}};
  rep.diagnostics["ud_hitting"] = std::string(to_string(ud_verdict));
  rep.diagnostics["ks"] = ks;
  const bool ok = upper.verdict == Verdict::pass && ud_verdict == Verdict::pass && ks_ok;
  rep.verdict = ok ? Verdict::pass : Verdict::fail;
  return rep;
}

/// P_n(ξ_n ∈ F) for a selection ξ_n ∈ A(Z_n, ε_n) against the capacity
/// T̂(F) of A(Z, ε) under the limit, one-sided. Also records whether
/// T̂(E) = 1 holds exactly.
inline TestReport test_selection_portmanteau(std::span<const IntegrandSampler> seq, std::span<const double> eps_seq,
                                             SelectionRule rule, const IntegrandSampler& limit, double eps,
                                             std::span<const PanelSet> F_panel, std::uint64_t N, std::uint64_t seed,
                                             double tol) {
  TestReport rep = detail::make_report("selection", seq.size(), N, seed, tol, Comparison::one_sided);
  detail::check_eps(eps_seq, seq.size(), "selection");
  std::vector<ClosedSet> targets;
  for (const auto& f : F_panel) targets.push_back(f.set);
  for (const auto& f : F_panel) rep.panels.push_back({f.id, f.description, {}, {}, 0, 0, false, {}});
  for (std::size_t n = 0; n < seq.size(); ++n) {
    const SetSampler xi = selection_sampler(seq[n], eps_seq[n], rule);
    const auto est = estimate_capacities(xi, targets, N, seed);
    for (std::size_t p = 0; p < F_panel.size(); ++p) rep.panels[p].sequence.push_back(est[p]);
  }
  const SetSampler A = argmin_set_sampler(limit, eps).without_oracle();
  targets.push_back(ClosedSet::full(limit.grid));
  const auto T = estimate_capacities(A, targets, N, seed);
  for (std::size_t p = 0; p < F_panel.size(); ++p) rep.panels[p].limit = T[p];
  const auto& TE = T.back();
  rep.diagnostics["rule"] = std::string(to_string(rule));
  rep.diagnostics["capacity_of_E"] = TE.value;
  rep.diagnostics["capacity_of_E_exact_one"] = TE.count == TE.n_samples;
  detail::score(rep);
  if (TE.count != TE.n_samples) rep.verdict = Verdict::fail;
  return rep;
}

}  // namespace epilab
