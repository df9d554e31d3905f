#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epilab/config.hpp"
#include "epilab/io.hpp"
#include "epilab/stochastic/capacity.hpp"
#include "epilab/stochastic/scenarios.hpp"
#include "epilab/stochastic/testers.hpp"

namespace epilab {

/// Exit status contract of the runner.
enum class ExitCode : int { pass = 0, fail = 1, hypothesis_not_met = 2, config_error = 3 };

inline ExitCode exit_code_for(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return ExitCode::pass;
    case Verdict::fail:
      return ExitCode::fail;
    case Verdict::hypothesis_not_met:
      return ExitCode::hypothesis_not_met;
  }
  return ExitCode::fail;
}

inline constexpr const char* kTesters[] = {"rcs-convergence", "epi-dist",  "argmin-upper-fell", "argmin-fell",
                                           "selection",       "tightness", "continuity-screen"};

inline constexpr const char* kConfigKeys[] = {
    "dim",      "lo",        "hi",         "h",          "value_lo",  "value_hi",   "h_v",    "scenario",
    "tester",   "N",         "seed",       "tol",        "eta",       "kappa",      "delta",  "ks_tol",
    "mode",     "rule",      "eps",        "limit",      "panel",     "panel_size", "centers", "base_radii",
    "offsets",  "K",         "K_panel",    "F_panel",    "epi_panel", "center",     "radii",  "oracle",
    "expect_accept", "expect_reject", "output_dir"};

/// Defaults of the automatic U(D) panel recipe.
struct PanelRecipe {
  std::vector<double> centers{-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
  std::vector<double> base_radii{0.1, 0.25, 0.5, 0.75, 1.0, 1.5};
  std::vector<double> offsets{0.03, 0.015, 0.005};
  double delta = 0.0;  // 0: the lattice spacing
  double kappa = 0.02;
  std::size_t size = 20;
};

struct ExperimentConfig {
  GridSpec grid;
  std::string scenario;
  std::string tester;
  std::uint64_t N = 200000;
  std::uint64_t seed = 1;
  double tol = 0.01;
  double eta = 0.01;
  double ks_tol = 0.02;
  double eps = 0.0;
  EpiMode mode = EpiMode::le;
  SelectionRule rule = SelectionRule::lexicographic_min;
  std::string limit;
  PanelRecipe recipe;
  FlatConfig raw;
};

inline ExperimentConfig parse_experiment(const FlatConfig& c) {
  for (const auto& k : c.keys()) {
    bool known = false;
    for (const char* kk : kConfigKeys) known = known || k == kk;
    if (!known) throw config_error("unknown config key '" + k + "'");
  }
  ExperimentConfig e;
  e.raw = c;
  e.grid = grid_spec_from(c);
  e.scenario = c.get_or("scenario", "");
  e.tester = c.get_or("tester", "");
  if (e.scenario.empty()) throw config_error("config: 'scenario' is required");
  if (e.tester.empty()) throw config_error("config: 'tester' is required");
  bool known = false;
  for (const char* t : kTesters) known = known || e.tester == t;
  if (!known) throw config_error("unknown tester '" + e.tester + "'");
  e.N = c.count("N", e.N);
  if (e.N < 1) throw config_error("N must be >= 1");
  e.seed = c.count("seed", e.seed);
  e.tol = c.number("tol", e.tol);
  e.eta = c.number("eta", e.eta);
  e.ks_tol = c.number("ks_tol", e.ks_tol);
  e.eps = c.number("eps", e.eps);
  const std::string mode = c.get_or("mode", "le");
  if (mode != "le" && mode != "gt") throw config_error("mode must be 'le' or 'gt'");
  e.mode = mode == "le" ? EpiMode::le : EpiMode::gt;
  try {
    e.rule = parse_selection_rule(c.get_or("rule", "lexicographic-min"));
  } catch (const usage_error& err) {
    throw config_error(err.what());
  }
  e.limit = c.get_or("limit", "");
  e.recipe.centers = c.numbers("centers", e.recipe.centers);
  e.recipe.base_radii = c.numbers("base_radii", e.recipe.base_radii);
  e.recipe.offsets = c.numbers("offsets", e.recipe.offsets);
  e.recipe.delta = c.number("delta", e.recipe.delta);
  e.recipe.kappa = c.number("kappa", e.recipe.kappa);
  e.recipe.size = c.count("panel_size", e.recipe.size);
  return e;
}

namespace detail {

struct Call {
  std::string name;
  std::vector<double> args;
};

inline Call parse_call(const std::string& text) {
  const std::string t = FlatConfig::trim(text);
  const auto open = t.find('(');
  if (open == std::string::npos) return {t, {}};
  if (t.back() != ')') throw config_error("malformed term '" + t + "'");
  Call c{FlatConfig::trim(t.substr(0, open)), {}};
  const std::string inner = t.substr(open + 1, t.size() - open - 2);
  for (const auto& a : FlatConfig::split(inner, ',')) c.args.push_back(parse_double(FlatConfig::trim(a), "set term"));
  return c;
}

inline std::array<double, 2> center_of(const std::vector<double>& args, int dim) {
  return dim == 1 ? std::array<double, 2>{args[0], 0.0} : std::array<double, 2>{args[0], args[1]};
}

}  // namespace detail

/// Set expression: terms joined by '+' (union). Terms: ball(x, r) (or
/// ball(x, y, r) on 2-d grids), all, empty. Centers must be lattice points.
inline ClosedSet parse_set(const GridPtr& grid, const std::string& text) {
  ClosedSet out(grid);
  const int dim = grid->dim();
  for (const auto& term : FlatConfig::split(text, '+')) {
    const auto c = detail::parse_call(term);
    if (c.name == "all" && c.args.empty()) {
      out = ClosedSet::full(grid);
    } else if (c.name == "empty" && c.args.empty()) {
      continue;
    } else if (c.name == "ball" && c.args.size() == static_cast<std::size_t>(dim) + 1) {
      try {
        const Ball b{detail::center_of(c.args, dim), c.args.back()};
        out = out.unite(closed_ball(ball_center(grid, b), b.radius));
      } catch (const usage_error& e) {
        throw config_error(std::string("set expression: ") + e.what());
      }
    } else {
      throw config_error("set expression: cannot parse term '" + FlatConfig::trim(term) + "'");
    }
  }
  return out;
}

/// ';'-separated named sets; ids are F1, F2, ...
inline std::vector<PanelSet> parse_set_list(const GridPtr& grid, const std::string& text, const std::string& prefix) {
  std::vector<PanelSet> out;
  for (const auto& item : FlatConfig::split(text, ';')) {
    const std::string t = FlatConfig::trim(item);
    if (t.empty()) continue;
    out.push_back({prefix + std::to_string(out.size() + 1), t, parse_set(grid, t)});
  }
  if (out.empty()) throw config_error("empty set list");
  return out;
}

/// ';'-separated collections, members joined by '&'.
inline std::vector<KCollection> parse_k_panel(const GridPtr& grid, const std::string& text) {
  std::vector<KCollection> out;
  for (const auto& item : FlatConfig::split(text, ';')) {
    const std::string t = FlatConfig::trim(item);
    if (t.empty()) continue;
    KCollection k{"K" + std::to_string(out.size() + 1), t, {}};
    for (const auto& m : FlatConfig::split(t, '&')) k.sets.push_back(parse_set(grid, m));
    out.push_back(std::move(k));
  }
  if (out.empty()) throw config_error("empty K panel");
  return out;
}

/// ';'-separated tuples, components (x, r, alpha) joined by '&'.
inline std::vector<EpiTuple> parse_epi_panel(const GridPtr& grid, const std::string& text) {
  std::vector<EpiTuple> out;
  const int dim = grid->dim();
  for (const auto& item : FlatConfig::split(text, ';')) {
    const std::string t = FlatConfig::trim(item);
    if (t.empty()) continue;
    EpiTuple tuple{"E" + std::to_string(out.size() + 1), {}};
    for (const auto& m : FlatConfig::split(t, '&')) {
      const auto c = detail::parse_call(m);
      if (!c.name.empty() || c.args.size() != static_cast<std::size_t>(dim) + 2) {
        throw config_error("epi panel: expected (x, r, alpha), got '" + FlatConfig::trim(m) + "'");
      }
      EpiComponent comp;
      comp.x = detail::center_of(c.args, dim);
      comp.r = c.args[c.args.size() - 2];
      comp.alpha = c.args.back();
      if (!grid->on_lattice(std::vector<double>(comp.x.begin(), comp.x.begin() + dim))) {
        throw config_error("epi panel: centers must be lattice points");
      }
      if (!(comp.r > 0.0)) throw config_error("epi panel: radii must be positive");
      tuple.components.push_back(comp);
    }
    out.push_back(std::move(tuple));
  }
  if (out.empty()) throw config_error("empty epi panel");
  return out;
}

struct AutoPanel {
  RadiusLedger ledger;
  std::vector<DBallUnion> unions;
  std::vector<PanelSet> sets;
};

/// U(D) panel with the radius ledger screened against `law`.
inline AutoPanel auto_ud_panel(const SetSampler& law, const PanelRecipe& recipe, std::uint64_t N,
                               std::uint64_t seed) {
  const GridPtr& grid = law.grid;
  std::vector<Point> centers;
  for (double x : recipe.centers) {
    std::vector<double> c{x};
    if (grid->dim() == 2) c.push_back(0.0);
    if (grid->on_lattice(c)) centers.emplace_back(grid, grid->nearest(c));
  }
  if (centers.empty()) throw config_error("auto panel: no recipe center lies on the lattice");
  ScreenConfig sc;
  sc.sampler = &law;
  sc.centers = centers;
  sc.delta = recipe.delta > 0.0 ? recipe.delta : grid->h();
  sc.N = N;
  sc.seed = seed;
  sc.kappa = recipe.kappa;
  AutoPanel p;
  try {
    p.ledger = build_D(recipe.base_radii, recipe.offsets, sc);
  } catch (const usage_error& e) {
    throw config_error(std::string("auto panel: ") + e.what());
  }
  p.unions = make_ud_panel(centers, p.ledger, recipe.size, seed);
  p.sets = realize_panel(p.unions, grid);
  return p;
}

inline nlohmann::json ledger_json(const RadiusLedger& L) {
  return {{"base_radii", L.base_radii},
          {"offsets", L.offsets},
          {"candidates", L.candidates},
          {"accepted", L.accepted},
          {"rejected", L.rejected},
          {"offsets_below_resolution", L.offsets_below_resolution}};
}

/// Scenario library hook; tests substitute faulty libraries here.
using Library = std::function<std::vector<Scenario>(const GridPtr&)>;

inline Library default_library() { return [](const GridPtr& g) { return scenario_library(g); }; }

/// Fault fixture: `base` with every sequence sampler of scenario `id`
/// replaced by one that always draws the empty set.
inline Library with_broken_sampler(Library base, std::string id) {
  return [base = std::move(base), id = std::move(id)](const GridPtr& g) {
    auto lib = base(g);
    for (auto& s : lib) {
      if (s.id != id) continue;
      for (auto& c : s.set_sequence) {
        c.generator = [g](Rng&) { return ClosedSet(g); };
        c.analytic_capacity = nullptr;
        c.deterministic = true;
      }
      for (auto& z : s.sequence) {
        z.generator = [](Rng&, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
      }
    }
    return lib;
  };
}

namespace detail {

inline const IntegrandSampler& chosen_limit(const Scenario& s, const std::string& name) {
  if (name.empty() || name == "default") return s.limit;
  const auto it = s.alternative_limits.find(name);
  if (it == s.alternative_limits.end()) {
    throw config_error("scenario '" + s.id + "' has no alternative limit '" + name + "'");
  }
  return it->second;
}

inline void require_integrands(const Scenario& s, const std::string& tester) {
  if (s.kind != ScenarioKind::integrands) {
    throw config_error("tester '" + tester + "' needs an integrand scenario; '" + s.id + "' holds random sets");
  }
}

inline std::vector<KCollection> singletons_of(const std::vector<PanelSet>& sets) {
  std::vector<KCollection> out;
  for (const auto& s : sets) out.push_back({"K" + s.id.substr(1), s.description, {s.set}});
  return out;
}

inline TestReport continuity_report(const ExperimentConfig& cfg, const Scenario& s, const GridPtr& grid) {
  SetSampler law = s.limit_sets_view();
  const std::string oracle = cfg.raw.get_or("oracle", "analytic");
  if (oracle == "monte-carlo") {
    law = law.without_oracle();
    law.deterministic = false;
  } else if (oracle != "analytic") {
    throw config_error("oracle must be 'analytic' or 'monte-carlo'");
  }
  const auto cvec = cfg.raw.numbers("center", {0.0});
  std::vector<double> cc = cvec;
  if (grid->dim() == 2 && cc.size() == 1) cc.push_back(0.0);
  if (!grid->on_lattice(cc)) throw config_error("continuity-screen: center is not a lattice point");
  const Point center(grid, grid->nearest(cc));
  const auto radii = cfg.raw.has("radii") ? cfg.raw.numbers("radii", {})
                                          : radius_candidates(cfg.recipe.base_radii, cfg.recipe.offsets);
  const double delta = cfg.recipe.delta > 0.0 ? cfg.recipe.delta : grid->h();
  ScreenResult res;
  try {
    res = detect_continuity_radii(law, center, radii, delta, cfg.N, cfg.seed, cfg.recipe.kappa);
  } catch (const usage_error& e) {
    throw config_error(e.what());
  }
  TestReport rep;
  rep.tester = "continuity-screen";
  rep.scenario = s.id;
  rep.N = cfg.N;
  rep.seed = cfg.seed;
  rep.tol = cfg.recipe.kappa;
  rep.threshold = cfg.recipe.kappa;
  rep.indices = {1};
  rep.tail_start = 0;
  rep.comparison = Comparison::two_sided;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : res.rows) {
    PanelResult p;
    p.id = "r=" + format_double(row.radius);
    p.description = "ball(c, r - delta) against ball(c, r + delta)";
    p.sequence = {row.inner};
    p.limit = row.outer;
    p.max_discrepancy = row.jump;
    p.max_adjusted = row.jump - (row.threshold - cfg.recipe.kappa);
    p.note = row.accepted ? "accepted" : "rejected";
    rep.panels.push_back(std::move(p));
    rows.push_back({{"radius", row.radius}, {"jump", row.jump}, {"threshold", row.threshold}, {"accepted", row.accepted}});
  }
  for (const auto& p : rep.panels) {
    rep.max_discrepancy = std::max(rep.max_discrepancy, p.max_discrepancy);
    rep.max_adjusted_discrepancy = std::max(rep.max_adjusted_discrepancy, p.max_adjusted);
  }
  rep.diagnostics["screen"] = rows;
  rep.diagnostics["accepted"] = res.accepted;
  rep.diagnostics["analytic"] = res.analytic;
  rep.diagnostics["delta"] = delta;
  // Without expectations the screen passes when it keeps some radius.
  bool ok = !res.accepted.empty();
  auto contains = [&](double r) {
    for (double a : res.accepted) {
      if (std::abs(a - r) <= 1e-12) return true;
    }
    return false;
  };
  for (double r : cfg.raw.numbers("expect_accept", {})) ok = ok && contains(r);
  for (double r : cfg.raw.numbers("expect_reject", {})) ok = ok && !contains(r);
  rep.verdict = ok ? Verdict::pass : Verdict::fail;
  return rep;
}

}  // namespace detail

/// Runs one configured tester and returns its report.
inline TestReport run_experiment(const ExperimentConfig& cfg, const Library& library = default_library()) {
  const GridPtr grid = make_grid(cfg.grid);
  const auto lib = library(grid);
  const Scenario s = find_scenario(lib, cfg.scenario);
  const std::string& t = cfg.tester;
  TestReport rep;
  const FlatConfig& c = cfg.raw;
  const std::uint64_t N = cfg.N;
  const std::uint64_t seed = cfg.seed;
  try {
    if (t == "continuity-screen") {
      rep = detail::continuity_report(cfg, s, grid);
    } else if (t == "rcs-convergence") {
      const auto seq = s.sets_view();
      const auto lim = s.limit_sets_view();
      std::vector<PanelSet> panel;
      nlohmann::json ledger;
      if (c.has("panel") && c.get_or("panel", "") != "auto") {
        panel = parse_set_list(grid, *c.get("panel"), "U");
      } else {
        const auto ap = auto_ud_panel(lim, cfg.recipe, N, seed);
        panel = ap.sets;
        ledger = ledger_json(ap.ledger);
      }
      rep = test_rcs_convergence(seq, lim, panel, N, seed, cfg.tol);
      if (!ledger.is_null()) rep.diagnostics["ledger"] = ledger;
    } else {
      detail::require_integrands(s, t);
      const IntegrandSampler& lim = detail::chosen_limit(s, cfg.limit);
      const double eps = c.has("eps") ? cfg.eps : s.eps;
      if (t == "epi-dist") {
        if (!c.has("epi_panel")) throw config_error("tester 'epi-dist' needs an 'epi_panel'");
        const auto panel = parse_epi_panel(grid, *c.get("epi_panel"));
        rep = test_epi_convergence_dist(s.sequence, lim, panel, N, seed, cfg.tol, cfg.mode, cfg.recipe.kappa);
      } else if (t == "tightness") {
        const ClosedSet K = parse_set(grid, c.get_or("K", "all"));
        rep = test_tightness(s.sequence, s.eps_sequence, K, N, seed, cfg.eta);
      } else {
        const SetSampler lim_sets = argmin_set_sampler(lim, eps);
        auto auto_sets = [&]() {
          const auto ap = auto_ud_panel(lim_sets, cfg.recipe, N, seed);
          rep.diagnostics["ledger"] = ledger_json(ap.ledger);
          return ap.sets;
        };
        nlohmann::json ledger_diag;
        if (t == "argmin-upper-fell") {
          std::vector<KCollection> kp;
          if (c.has("K_panel") && c.get_or("K_panel", "") != "auto") {
            kp = parse_k_panel(grid, *c.get("K_panel"));
          } else {
            kp = detail::singletons_of(auto_sets());
          }
          ledger_diag = rep.diagnostics;
          rep = test_argmin_upper_fell(s.sequence, s.eps_sequence, lim, eps, kp, N, seed, cfg.tol);
        } else if (t == "argmin-fell") {
          const ClosedSet K = parse_set(grid, c.get_or("K", "all"));
          const auto U = c.has("panel") && c.get_or("panel", "") != "auto" ? parse_set_list(grid, *c.get("panel"), "U")
                                                                            : auto_sets();
          const auto kp = c.has("K_panel") && c.get_or("K_panel", "") != "auto"
                              ? parse_k_panel(grid, *c.get("K_panel"))
                              : detail::singletons_of(U);
          ledger_diag = rep.diagnostics;
          ArgminFellOptions opt;
          opt.eta = cfg.eta;
          opt.ks_tol = cfg.ks_tol;
          rep = test_argmin_fell(s.sequence, s.eps_sequence, lim, K, kp, U, N, seed, cfg.tol, opt);
        } else if (t == "selection") {
          const auto F = c.has("F_panel") && c.get_or("F_panel", "") != "auto"
                             ? parse_set_list(grid, *c.get("F_panel"), "F")
                             : auto_sets();
          ledger_diag = rep.diagnostics;
          rep = test_selection_portmanteau(s.sequence, s.eps_sequence, cfg.rule, lim, eps, F, N, seed, cfg.tol);
        }
        if (ledger_diag.contains("ledger")) rep.diagnostics["ledger"] = ledger_diag["ledger"];
      }
    }
  } catch (const usage_error& e) {
    throw config_error(e.what());
  }
  rep.scenario = s.id;
  if (t != "continuity-screen") rep.indices = s.indices;
  return rep;
}

inline std::string summary_text(const TestReport& r) {
  std::string out;
  out += "tester:    " + r.tester + "\n";
  out += "scenario:  " + r.scenario + "\n";
  out += "verdict:   " + std::string(to_string(r.verdict)) + "\n";
  out += "N:         " + std::to_string(r.N) + "\n";
  out += "seed:      " + std::to_string(r.seed) + "\n";
  out += "tol:       " + format_double(r.tol) + "\n";
  out += "tail:      positions " + std::to_string(r.tail_start + 1) + ".." + std::to_string(r.indices.size()) + " (" +
         std::string(to_string(r.comparison)) + ")\n";
  out += "max discrepancy:          " + format_double(r.max_discrepancy) + "\n";
  out += "max adjusted discrepancy: " + format_double(r.max_adjusted_discrepancy) + "\n";
  out += "threshold:                " + format_double(r.threshold) + "\n";
  out += "\npanel\tmax_disc\tmax_adj\tlimit\tnote\n";
  for (const auto& p : r.panels) {
    out += p.id + "\t" + format_double(p.max_discrepancy) + "\t" + format_double(p.max_adjusted) + "\t" +
           format_double(p.limit.value) + "\t" + (p.excluded ? "excluded " : "") + p.note + "\n";
  }
  return out;
}

/// Output directory: the config's output_dir, else $EPILAB_OUTPUT_DIR,
/// else ./epilab-out; each run writes into <dir>/<config stem>.
inline std::filesystem::path output_dir_for(const ExperimentConfig& cfg, const std::string& config_path) {
  std::filesystem::path base;
  if (const auto d = cfg.raw.get("output_dir")) {
    return std::filesystem::path(*d);
  }
  if (const char* env = std::getenv("EPILAB_OUTPUT_DIR"); env && *env) {
    base = env;
  } else {
    base = "epilab-out";
  }
  return base / std::filesystem::path(config_path).stem();
}

struct RunOutcome {
  ExitCode code = ExitCode::config_error;
  std::string message;
  std::filesystem::path dir;
  TestReport report;
};

/// The `run` subcommand: load, execute, write report.json, series.csv and
/// summary.txt. Config problems map to exit code 3 without artifacts.
inline RunOutcome run_config_file(const std::string& path, const Library& library = default_library()) {
  RunOutcome out;
  ExperimentConfig cfg;
  try {
    cfg = parse_experiment(FlatConfig::load(path));
    out.report = run_experiment(cfg, library);
  } catch (const config_error& e) {
    out.code = ExitCode::config_error;
    out.message = e.what();
    return out;
  }
  out.dir = output_dir_for(cfg, path);
  std::filesystem::create_directories(out.dir);
  write_file((out.dir / "report.json").string(), to_json(out.report).dump(2) + "\n");
  write_file((out.dir / "series.csv").string(), series_csv(out.report));
  write_file((out.dir / "summary.txt").string(), summary_text(out.report));
  out.code = exit_code_for(out.report.verdict);
  out.message = std::string(to_string(out.report.verdict));
  return out;
}

/// The `list` subcommand text: id, title, parameters, oracles, theorems.
inline std::string list_scenarios(const GridSpec& spec = {}) {
  const auto lib = scenario_library(make_grid(spec));
  std::string out;
  for (const auto& s : lib) {
    out += s.id + "\t" + s.title + "\n";
    out += "  kind:     " + std::string(s.kind == ScenarioKind::sets ? "random closed sets" : "normal integrands") + "\n";
    out += "  params:   " + s.params.dump() + "\n";
    std::string oracles;
    for (const auto& o : s.oracles) oracles += (oracles.empty() ? "" : "; ") + o;
    out += "  oracles:  " + oracles + "\n";
    std::string th;
    for (const auto& o : s.theorems) th += (th.empty() ? "" : ", ") + o;
    out += "  theorems: " + th + "\n";
    if (s.kind == ScenarioKind::integrands) {
      out += "  epi-convergent: " + std::string(s.epi_convergent ? "yes" : "no") + "\n";
    }
  }
  return out;
}

}  // namespace epilab
