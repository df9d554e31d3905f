#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epilab/argmin.hpp"
#include "epilab/experiment.hpp"
#include "epilab/io.hpp"
#include "epilab/lsc.hpp"
#include "epilab/stochastic/capacity.hpp"
#include "epilab/stochastic/scenarios.hpp"
#include "epilab/stochastic/testers.hpp"

namespace epilab {

inline constexpr std::uint64_t kDefaultVerifySeed = 20240611;

struct VerifyOptions {
  std::uint64_t seed = kDefaultVerifySeed;
  std::uint64_t N = 200000;
  std::uint64_t N_ks = 100000;
  std::size_t epi_panels = 10000;
  double tol = 0.01;
  GridSpec grid{};
  Library library = default_library();
};

struct CriterionResult {
  int number = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  nlohmann::json data = nlohmann::json::object();
};

inline CriterionResult make_criterion(int number, std::string name) {
  CriterionResult c;
  c.number = number;
  c.name = std::move(name);
  return c;
}

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<CriterionResult> criteria;
  bool all_pass() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.pass; });
  }
};

namespace detail {

/// Random lsc function: a clipped random walk with +inf stretches and the
/// occasional -inf point or spike.
inline LscFunction random_lsc(const GridPtr& grid, Rng& rng) {
  const Grid& g = *grid;
  std::vector<ExtReal> v(g.size(), ExtReal(0.0));
  const double span = g.spec().value_hi - g.spec().value_lo;
  double level = g.spec().value_lo + rng.uniform() * span;
  const double step = 0.005 + 0.2 * rng.uniform();
  const bool quantize = rng.below(3) == 0;
  bool gap = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    level += step * (2.0 * rng.uniform() - 1.0);
    level = std::clamp(level, g.spec().value_lo - 1.0, g.spec().value_hi + 1.0);
    if (rng.below(200) == 0) gap = !gap;
    double x = level;
    if (quantize) x = g.ordinate(g.nearest_ordinate(std::clamp(x, g.spec().value_lo, g.spec().value_hi)));
    if (gap) {
      v[i] = ExtReal::pos_inf();
    } else if (rng.below(2000) == 0) {
      v[i] = ExtReal::neg_inf();
    } else if (rng.below(100) == 0) {
      v[i] = ExtReal(x - 2.0 * rng.uniform());
    } else {
      v[i] = ExtReal(x);
    }
  }
  return LscFunction(grid, std::move(v));
}

}  // namespace detail

/// Epigraph hit through the infimum agrees with hitting the enumerated
/// product ball, on random (f, x, r, alpha).
inline CriterionResult criterion_epigraph_equivalence(const VerifyOptions& o) {
  auto c = make_criterion(1, "epigraph-equivalence");
  const GridPtr grid = make_grid(o.grid);
  const Grid& g = *grid;
  Rng rng = Rng::substream(o.seed, 1001, 0);
  std::size_t agree = 0;
  std::size_t hits_count = 0;
  std::size_t done = 0;
  nlohmann::json first_mismatch = nullptr;
  const std::size_t per_function = 100;
  const std::size_t nv = g.ordinate_count();
  while (done < o.epi_panels) {
    const LscFunction f = detail::random_lsc(grid, rng);
    const SetMask<ProductSpace> epi(epigraph(f));
    for (std::size_t k = 0; k < per_function && done < o.epi_panels; ++k, ++done) {
      const Point x(grid, rng.below(g.size()));
      const std::size_t rs = 1 + rng.below(60);
      const double r = static_cast<double>(rs) * g.h_v();
      // alpha + r must stay inside the ordinate window
      const std::size_t a_max = nv - 1 - std::min(nv - 1, rs);
      const std::size_t ak = rng.below(a_max + 1);
      const double alpha = g.ordinate(ak);
      const bool via_inf = epi_hits_product_ball(f, x, r, alpha);
      const bool direct = hits(product_closed_ball(ProductPoint(x, ak), r), epi);
      hits_count += direct ? 1 : 0;
      if (via_inf == direct) {
        ++agree;
      } else if (first_mismatch.is_null()) {
        first_mismatch = {{"x", point_json(g, x.index())}, {"r", r}, {"alpha", alpha}, {"via_inf", via_inf}};
      }
    }
  }
  c.pass = agree == done;
  c.detail = std::to_string(agree) + "/" + std::to_string(done) + " panels agree (" + std::to_string(hits_count) +
             " hits)";
  c.data = {{"panels", done}, {"agree", agree}, {"hits", hits_count}, {"first_mismatch", first_mismatch}};
  return c;
}

/// Direct union-hit estimate against the expansion of joint hit estimates.
inline CriterionResult criterion_inclusion_exclusion(const VerifyOptions& o) {
  auto c = make_criterion(2, "inclusion-exclusion");
  const GridPtr grid = make_grid(o.grid);
  const auto lib = o.library(grid);
  struct Case {
    std::string scenario;
    std::vector<std::pair<double, double>> balls;
  };
  const std::vector<Case> cases = {
      {"S2", {{0.2, 0.15}, {0.35, 0.1}, {0.8, 0.1}}},
      {"S4", {{1.0, 0.05}, {1.05, 0.1}, {0.0, 0.5}}},
  };
  c.pass = true;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& cs = cases[ci];
    const Scenario s = find_scenario(lib, cs.scenario);
    const SetSampler sampler = s.sets_view().back();
    std::vector<ClosedSet> Bs;
    ClosedSet U(grid);
    for (const auto& [x, r] : cs.balls) {
      Bs.push_back(closed_ball(Point::at(grid, {x}), r));
      U = U.unite(Bs.back());
    }
    const auto joint = joint_hit_table(sampler, Bs, o.N, o.seed + 2 * ci);
    const double expansion = inclusion_exclusion_union(joint);
    const CapacityEstimate direct = estimate_capacity(sampler, U, o.N, o.seed + 2 * ci + 1);
    // the expansion of empirical joint frequencies is itself a binomial
    // frequency on its own stream, so its standard error follows from its value
    const double p = std::clamp(expansion, 0.0, 1.0);
    const double se_expansion = std::sqrt(p * (1.0 - p) / static_cast<double>(o.N));
    const double pooled = std::sqrt(direct.std_error * direct.std_error + se_expansion * se_expansion);
    const double bound = 3.0 * pooled + 1e-12;
    const double diff = std::abs(direct.value - expansion);
    const bool ok = diff <= bound;
    c.pass = c.pass && ok;
    rows.push_back({{"scenario", cs.scenario},
                    {"direct", direct.value},
                    {"expansion", expansion},
                    {"difference", diff},
                    {"pooled_se", pooled},
                    {"bound", bound},
                    {"pass", ok}});
    c.detail += (c.detail.empty() ? "" : "; ") + cs.scenario + " |diff|=" + format_double(diff) +
                " bound=" + format_double(bound);
  }
  c.data = {{"cases", rows}, {"N", o.N}};
  return c;
}

namespace detail {

inline std::vector<PanelSet> ud_panel_for(const SetSampler& law, const VerifyOptions& o) {
  return auto_ud_panel(law, PanelRecipe{}, o.N, o.seed).sets;
}

inline nlohmann::json brief(const TestReport& r) {
  return {{"verdict", std::string(to_string(r.verdict))},
          {"max_discrepancy", r.max_discrepancy},
          {"max_adjusted_discrepancy", r.max_adjusted_discrepancy},
          {"threshold", r.threshold},
          {"panels", r.panels.size()}};
}

}  // namespace detail

/// Shrinking singletons pass the hitting test with zero discrepancy.
inline CriterionResult criterion_rcs_positive(const VerifyOptions& o) {
  auto c = make_criterion(3, "rcs-convergence-positive");
  const GridPtr grid = make_grid(o.grid);
  const Scenario s = find_scenario(o.library(grid), "S1");
  const auto panel = detail::ud_panel_for(s.limit_sets_view(), o);
  const TestReport r = test_rcs_convergence(s.sets_view(), s.limit_sets_view(), panel, o.N, o.seed, o.tol);
  c.pass = r.verdict == Verdict::pass && panel.size() == 20 && r.max_discrepancy <= 1e-12;
  c.detail = "verdict " + std::string(to_string(r.verdict)) + ", " + std::to_string(panel.size()) +
             " panel sets, max discrepancy " + format_double(r.max_discrepancy);
  c.data = detail::brief(r);
  return c;
}

/// Alternating singletons fail with a tail discrepancy of at least 0.9.
inline CriterionResult criterion_rcs_negative(const VerifyOptions& o) {
  auto c = make_criterion(4, "rcs-convergence-negative");
  const GridPtr grid = make_grid(o.grid);
  const Scenario s = find_scenario(o.library(grid), "alternating");
  const auto panel = detail::ud_panel_for(s.limit_sets_view(), o);
  const TestReport r = test_rcs_convergence(s.sets_view(), s.limit_sets_view(), panel, o.N, o.seed, o.tol);
  c.pass = r.verdict == Verdict::fail && r.max_discrepancy >= 0.9;
  c.detail = "verdict " + std::string(to_string(r.verdict)) + ", max discrepancy " + format_double(r.max_discrepancy);
  c.data = detail::brief(r);
  return c;
}

/// f_n(x) = (x - 1/n)^2 with eps_n = 1/n against x^2, eps = 0, along
/// n = 200 j so that the tail of eps_n is below the tolerance.
inline CriterionResult criterion_pk_inclusion(const VerifyOptions& o) {
  auto c = make_criterion(5, "pk-inclusion");
  const GridPtr grid = make_grid(o.grid);
  const double tol = 0.02;
  std::vector<LscFunction> fs;
  std::vector<double> eps;
  std::vector<std::uint64_t> ns;
  for (std::uint64_t j = 1; j <= 40; ++j) {
    const std::uint64_t n = 200 * j;
    const double shift = 1.0 / static_cast<double>(n);
    ns.push_back(n);
    fs.push_back(LscFunction::sample(grid, [&](const std::array<double, 2>& x) {
      return ExtReal((x[0] - shift) * (x[0] - shift) + (grid->dim() == 2 ? x[1] * x[1] : 0.0));
    }));
    eps.push_back(shift);
  }
  const LscFunction f = LscFunction::sample(grid, [&](const std::array<double, 2>& x) {
    return ExtReal(x[0] * x[0] + (grid->dim() == 2 ? x[1] * x[1] : 0.0));
  });
  const std::size_t tail = fs.size() / 2;
  const PkInclusionReport r = check_pk_inclusion(fs, eps, f, 0.0, tail, tol);
  c.pass = r.verdict == Verdict::pass && r.solutions.upper_excess <= tol + kSlack;
  c.detail = "verdict " + std::string(to_string(r.verdict)) + ", witnessed excess " +
             format_double(r.solutions.upper_excess) + " (tail n >= " + std::to_string(ns[tail]) + ")";
  c.data = to_json(r, *grid);
  c.data["indices"] = ns;
  return c;
}

/// Selected minimizer law at the last index of S3 against the rounded
/// normal law.
inline CriterionResult criterion_argmin_law(const VerifyOptions& o) {
  auto c = make_criterion(6, "argmin-law-ks");
  const GridPtr grid = make_grid(o.grid);
  const Scenario s = find_scenario(o.library(grid), "S3");
  const SetSampler lim_sets = argmin_set_sampler(s.limit, s.eps);
  VerifyOptions ko = o;
  ko.N = o.N_ks;
  const auto U = detail::ud_panel_for(lim_sets, ko);
  std::vector<KCollection> kp;
  for (const auto& u : U) kp.push_back({"K" + u.id.substr(1), u.description, {u.set}});
  const TestReport r = test_argmin_fell(s.sequence, s.eps_sequence, s.limit, ClosedSet::full(grid), kp, U, o.N_ks,
                                        o.seed, o.tol, ArgminFellOptions{});
  const auto& ks = r.diagnostics.contains("ks") ? r.diagnostics["ks"] : nlohmann::json();
  const bool has_ks = ks.is_object() && ks.contains("distance");
  const double d = has_ks ? ks["distance"].get<double>() : 1.0;
  c.pass = has_ks && d <= 0.02;
  c.detail = "KS distance " + format_double(d) + " at N=" + std::to_string(o.N_ks) + " (pipeline verdict " +
             std::string(to_string(r.verdict)) + ")";
  c.data = detail::brief(r);
  c.data["ks"] = ks;
  c.data["diagnostics"] = r.diagnostics;
  return c;
}

/// Selection portmanteau on the double well.
inline CriterionResult criterion_selection(const VerifyOptions& o) {
  auto c = make_criterion(7, "selection-portmanteau");
  const GridPtr grid = make_grid(o.grid);
  const Scenario s = find_scenario(o.library(grid), "S4");
  const std::vector<PanelSet> F = parse_set_list(grid, "ball(1, 0.05); ball(-1, 0.05); ball(0, 0.05); all", "F");
  const TestReport r = test_selection_portmanteau(s.sequence, s.eps_sequence, SelectionRule::lexicographic_min,
                                                  s.limit, 0.0, F, o.N, o.seed, o.tol);
  const PanelResult& p1 = r.panels.front();
  double lo = 1.0;
  double hi = 0.0;
  for (std::size_t n = r.tail_start; n < p1.sequence.size(); ++n) {
    lo = std::min(lo, p1.sequence[n].value);
    hi = std::max(hi, p1.sequence[n].value);
  }
  const bool band = lo >= 0.48 && hi <= 0.52;
  const bool t_one = std::abs(p1.limit.value - 1.0) <= 1e-12;
  const bool e_one = r.diagnostics.value("capacity_of_E_exact_one", false);
  c.pass = r.verdict == Verdict::pass && band && t_one && e_one;
  c.detail = "verdict " + std::string(to_string(r.verdict)) + ", ball(1,0.05) tail in [" + format_double(lo) + ", " +
             format_double(hi) + "], T(F)=" + format_double(p1.limit.value) +
             ", T(E)=1 " + (e_one ? "holds" : "fails");
  c.data = detail::brief(r);
  c.data["tail_range"] = {lo, hi};
  c.data["capacity_of_F1"] = p1.limit.value;
  c.data["capacity_of_E_exact_one"] = e_one;
  return c;
}

/// Continuity screen on the deterministic atom, analytic and Monte Carlo.
inline CriterionResult criterion_continuity_screen(const VerifyOptions& o) {
  auto c = make_criterion(8, "continuity-screen");
  const GridPtr grid = make_grid(o.grid);
  const Scenario s = find_scenario(o.library(grid), "atom");
  const Point center = Point::at(grid, {0.0});
  const std::vector<double> radii{0.3, 0.5, 0.7};
  SetSampler mc = s.limit_sets_view().without_oracle();
  mc.deterministic = false;
  const ScreenResult analytic = detect_continuity_radii(s.limit_sets_view(), center, radii, grid->h(), o.N, o.seed, 0.02);
  const ScreenResult sampled = detect_continuity_radii(mc, center, radii, grid->h(), o.N, o.seed, 0.02);
  auto verdicts_ok = [](const ScreenResult& r) {
    return r.rows.size() == 3 && r.rows[0].accepted && !r.rows[1].accepted &&
           r.rows[2].accepted;
  };
  c.pass = analytic.analytic && !sampled.analytic && verdicts_ok(analytic) && verdicts_ok(sampled);
  auto rows = [](const ScreenResult& r) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& row : r.rows) a.push_back({{"radius", row.radius}, {"jump", row.jump}, {"accepted", row.accepted}});
    return a;
  };
  c.detail = std::string("analytic ") + (verdicts_ok(analytic) ? "ok" : "wrong") + ", monte carlo " +
             (verdicts_ok(sampled) ? "ok" : "wrong") + " (accept 0.3, 0.7; reject 0.5)";
  c.data = {{"analytic", rows(analytic)}, {"monte_carlo", rows(sampled)}};
  return c;
}

/// Upper-Fell argmin test on every epi-convergent library scenario whose
/// eps sequence is compliant.
inline CriterionResult criterion_theorem_chain(const VerifyOptions& o) {
  auto c = make_criterion(10, "argmin-upper-fell-chain");
  const GridPtr grid = make_grid(o.grid);
  c.pass = true;
  nlohmann::json rows = nlohmann::json::array();
  std::size_t checked = 0;
  for (const auto& s : o.library(grid)) {
    if (s.kind != ScenarioKind::integrands || !s.epi_convergent) continue;
    const std::size_t tail = s.sequence.size() / 2;
    const double eps_sup = *std::max_element(s.eps_sequence.begin() + static_cast<std::ptrdiff_t>(tail),
                                             s.eps_sequence.end());
    if (eps_sup > s.eps + o.tol) {
      rows.push_back({{"scenario", s.id}, {"skipped", "eps sequence not compliant"}});
      continue;
    }
    const SetSampler lim_sets = argmin_set_sampler(s.limit, s.eps);
    const auto U = detail::ud_panel_for(lim_sets, o);
    std::vector<KCollection> kp;
    for (const auto& u : U) kp.push_back({"K" + u.id.substr(1), u.description, {u.set}});
    const TestReport r = test_argmin_upper_fell(s.sequence, s.eps_sequence, s.limit, s.eps, kp, o.N, o.seed, o.tol);
    ++checked;
    c.pass = c.pass && r.verdict == Verdict::pass;
    nlohmann::json row = detail::brief(r);
    row["scenario"] = s.id;
    rows.push_back(row);
    c.detail += (c.detail.empty() ? "" : ", ") + s.id + " " + std::string(to_string(r.verdict));
  }
  if (checked == 0) {
    c.pass = false;
    c.detail = "no epi-convergent scenario checked";
  }
  c.data = {{"scenarios", rows}};
  return c;
}

inline nlohmann::json to_json(const CriterionResult& c) {
  return {{"criterion", c.number}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}, {"data", c.data}};
}

inline nlohmann::json to_json(const VerifyReport& r) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& c : r.criteria) a.push_back(to_json(c));
  std::size_t passed = 0;
  for (const auto& c : r.criteria) passed += c.pass ? 1 : 0;
  return {{"seed", r.seed},
          {"criteria", a},
          {"passed", passed},
          {"failed", r.criteria.size() - passed},
          {"verdict", r.all_pass() ? "pass" : "fail"}};
}

struct CriterionEntry {
  int number;
  const char* name;
  CriterionResult (*run)(const VerifyOptions&);
};

inline constexpr CriterionEntry kCriteria[] = {
    {1, "epigraph-equivalence", criterion_epigraph_equivalence},
    {2, "inclusion-exclusion", criterion_inclusion_exclusion},
    {3, "rcs-convergence-positive", criterion_rcs_positive},
    {4, "rcs-convergence-negative", criterion_rcs_negative},
    {5, "pk-inclusion", criterion_pk_inclusion},
    {6, "argmin-law-ks", criterion_argmin_law},
    {7, "selection-portmanteau", criterion_selection},
    {8, "continuity-screen", criterion_continuity_screen},
    {10, "argmin-upper-fell-chain", criterion_theorem_chain},
};

namespace detail {

inline CriterionResult run_guarded(const CriterionEntry& e, const VerifyOptions& o) {
  try {
    return e.run(o);
  } catch (const std::exception& ex) {
    auto c = make_criterion(e.number, e.name);
    c.detail = std::string("error: ") + ex.what();
    return c;
  }
}

}  // namespace detail

/// Runs the criteria (all of them, or those listed in `only`). The
/// determinism criterion re-runs the cheaper stochastic criteria and compares
/// their serialized results byte for byte; comparing whole report files
/// across processes is left to the caller.
inline VerifyReport verify_all(const VerifyOptions& o, const std::vector<int>& only = {}) {
  auto wanted = [&](int k) { return only.empty() || std::find(only.begin(), only.end(), k) != only.end(); };
  VerifyReport rep;
  rep.seed = o.seed;
  std::map<int, std::string> first_run;
  for (const auto& e : kCriteria) {
    if (e.number == 10 && wanted(9)) {
      auto det = make_criterion(9, "determinism");
      std::vector<int> again;
      std::vector<int> mismatched;
      for (int k : {2, 3, 4, 7, 8}) {
        if (!first_run.count(k)) continue;
        again.push_back(k);
        const auto& entry = *std::find_if(std::begin(kCriteria), std::end(kCriteria),
                                          [k](const CriterionEntry& c) { return c.number == k; });
        if (to_json(detail::run_guarded(entry, o)).dump() != first_run[k]) mismatched.push_back(k);
      }
      det.pass = !again.empty() && mismatched.empty();
      std::string list;
      for (int k : (mismatched.empty() ? again : mismatched)) list += (list.empty() ? "" : ",") + std::to_string(k);
      if (again.empty()) {
        det.detail = "nothing to re-run";
      } else {
        det.detail = det.pass ? "re-run of criteria " + list + " is byte-identical" : "re-run differs for " + list;
      }
      det.data = {{"rerun", again}, {"mismatched", mismatched}};
      rep.criteria.push_back(det);
    }
    if (!wanted(e.number)) continue;
    rep.criteria.push_back(detail::run_guarded(e, o));
    first_run[e.number] = to_json(rep.criteria.back()).dump();
  }
  return rep;
}

inline std::string verify_lines(const VerifyReport& r) {
  std::string out;
  for (const auto& c : r.criteria) {
    out += std::string(c.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(c.number) + " " + c.name + ": " +
           c.detail + "\n";
  }
  out += std::string(r.all_pass() ? "verify-all: pass" : "verify-all: FAIL") + "\n";
  return out;
}

/// Writes report.json (no timings, so it is reproducible byte for byte).
inline void write_verify_report(const VerifyReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file((dir / "report.json").string(), to_json(r).dump(2) + "\n");
}

}  // namespace epilab
