#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epilab/argmin.hpp"
#include "epilab/format.hpp"
#include "epilab/hyperspace.hpp"
#include "epilab/lsc.hpp"
#include "epilab/stochastic/capacity.hpp"
#include "epilab/stochastic/testers.hpp"

namespace epilab {

using nlohmann::json;

// Closed sets: sorted lattice indices.

template <class Space>
json set_to_json(const BasicClosedSet<Space>& s) {
  json a = json::array();
  for (auto i : s.members()) a.push_back(i);
  return a;
}

template <class Space>
BasicClosedSet<Space> set_from_json(const GridPtr& grid, const json& a) {
  if (!a.is_array()) throw config_error("closed set: expected a JSON array of lattice indices");
  std::vector<typename BasicClosedSet<Space>::index_type> m;
  for (const auto& v : a) {
    if (!v.is_number_unsigned()) throw config_error("closed set: indices must be non-negative integers");
    m.push_back(v.get<std::uint32_t>());
  }
  try {
    return BasicClosedSet<Space>(grid, std::move(m));
  } catch (const usage_error& e) {
    throw config_error(e.what());
  }
}

template <class Space>
std::string set_to_csv(const BasicClosedSet<Space>& s) {
  std::string out = "index\n";
  for (auto i : s.members()) out += std::to_string(i) + "\n";
  return out;
}

template <class Space>
BasicClosedSet<Space> set_from_csv(const GridPtr& grid, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<typename BasicClosedSet<Space>::index_type> m;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header) {
      header = false;
      if (line == "index") continue;
    }
    if (line.empty()) continue;
    m.push_back(static_cast<std::uint32_t>(parse_double(line, "closed set csv")));
  }
  try {
    return BasicClosedSet<Space>(grid, std::move(m));
  } catch (const usage_error& e) {
    throw config_error(e.what());
  }
}

// Lsc functions: "index,value" rows, with +inf / -inf tokens.

inline std::string function_to_csv(const LscFunction& f) {
  std::string out = "index,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) out += std::to_string(i) + "," + f[i].to_string() + "\n";
  return out;
}

inline LscFunction function_from_csv(const GridPtr& grid, const std::string& text) {
  std::vector<ExtReal> values(grid->size(), ExtReal::pos_inf());
  std::vector<std::uint8_t> seen(grid->size(), 0);
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header) {
      header = false;
      if (line == "index,value") continue;
    }
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw config_error("function csv: expected 'index,value'");
    const double idx = parse_double(line.substr(0, comma), "function csv index");
    if (idx < 0 || idx >= static_cast<double>(grid->size()) || idx != std::floor(idx)) {
      throw config_error("function csv: index out of range");
    }
    const auto i = static_cast<std::size_t>(idx);
    values[i] = ExtReal(parse_double(line.substr(comma + 1), "function csv value"));
    seen[i] = 1;
  }
  for (auto s : seen) {
    if (!s) throw config_error("function csv: every lattice index needs a value");
  }
  return LscFunction(grid, std::move(values));
}

inline json ball_to_json(const Ball& b, int dim) {
  json c = json::array();
  for (int a = 0; a < dim; ++a) c.push_back(b.center[a]);
  return {{"center", c}, {"radius", b.radius}};
}

inline json base_element_to_json(const BaseElement& B, int dim) {
  json m = json::array();
  json h = json::array();
  for (const auto& b : B.missing) m.push_back(ball_to_json(b, dim));
  for (const auto& b : B.hitting) h.push_back(ball_to_json(b, dim));
  return {{"missing", m}, {"hitting", h}};
}

inline BaseElement base_element_from_json(const json& j) {
  BaseElement B;
  auto read = [](const json& arr, std::vector<Ball>& out) {
    for (const auto& b : arr) {
      Ball ball;
      const auto& c = b.at("center");
      for (std::size_t a = 0; a < c.size() && a < 2; ++a) ball.center[a] = c[a].get<double>();
      ball.radius = b.at("radius").get<double>();
      out.push_back(ball);
    }
  };
  read(j.at("missing"), B.missing);
  if (j.contains("hitting")) read(j.at("hitting"), B.hitting);
  return B;
}

inline json point_json(const Grid& g, std::size_t index) {
  const auto c = g.coords(index);
  json p = json::array();
  for (int a = 0; a < g.dim(); ++a) p.push_back(c[a]);
  return p;
}

/// JSON for a set-convergence result. Witnesses are given as lattice
/// indices and coordinates; product-lattice witnesses carry the ordinate.
inline json to_json(const SetConvergence& c, const Grid& g, bool product) {
  auto witness = [&](const std::optional<std::size_t>& w) -> json {
    if (!w) return nullptr;
    if (!product) return {{"index", *w}, {"point", point_json(g, *w)}};
    const std::size_t nv = g.ordinate_count();
    return {{"index", *w}, {"point", point_json(g, *w / nv)}, {"ordinate", g.ordinate(*w % nv)}};
  };
  return {{"converged", c.converged},      {"tol", c.tol},
          {"tail_start", c.tail_start},    {"tail_length", c.tail_length},
          {"upper_ok", c.upper_ok},        {"upper_excess", c.upper_excess},
          {"upper_witness", witness(c.upper_witness)},
          {"outer_excess", c.outer_excess},
          {"lower_ok", c.lower_ok},        {"lower_excess", c.lower_excess},
          {"lower_witness", witness(c.lower_witness)},
          {"outer_size", c.outer_size},    {"inner_size", c.inner_size}};
}

inline json to_json(const PkInclusionReport& r, const Grid& g) {
  return {{"verdict", std::string(to_string(r.verdict))},
          {"tol", r.tol},
          {"tail_start", r.tail_start},
          {"eps", r.eps},
          {"eps_tail_sup", r.eps_tail_sup},
          {"eps_ok", r.eps_ok},
          {"epi_converges", r.epi.converged},
          {"epigraphs", to_json(r.epi.sets, g, true)},
          {"solutions", to_json(r.solutions, g, false)},
          {"excess", r.solutions.upper_excess},
          {"limit_size", r.limit_size},
          {"note", r.note}};
}

inline json to_json(const CapacityEstimate& e) {
  return {{"value", e.value}, {"n_samples", e.n_samples}, {"std_error", e.std_error}, {"exact", e.exact}};
}

inline json to_json(const TestReport& r) {
  json panels = json::array();
  for (const auto& p : r.panels) {
    json seq = json::array();
    for (const auto& e : p.sequence) seq.push_back(to_json(e));
    panels.push_back({{"id", p.id},
                      {"description", p.description},
                      {"sequence", seq},
                      {"limit", to_json(p.limit)},
                      {"max_discrepancy", p.max_discrepancy},
                      {"max_adjusted_discrepancy", p.max_adjusted},
                      {"excluded", p.excluded},
                      {"note", p.note}});
  }
  return {{"tester", r.tester},
          {"scenario", r.scenario},
          {"verdict", std::string(to_string(r.verdict))},
          {"N", r.N},
          {"seed", r.seed},
          {"tol", r.tol},
          {"indices", r.indices},
          {"tail_start", r.tail_start},
          {"comparison", std::string(to_string(r.comparison))},
          {"panels", panels},
          {"max_discrepancy", r.max_discrepancy},
          {"max_adjusted_discrepancy", r.max_adjusted_discrepancy},
          {"threshold", r.threshold},
          {"diagnostics", r.diagnostics}};
}

/// Plot series: one row per (sequence index, panel element), then the limit
/// rows with index "limit".
inline std::string series_csv(const TestReport& r) {
  std::string out = "index,panel_id,estimate,std_error\n";
  for (std::size_t n = 0; n < r.indices.size(); ++n) {
    for (const auto& p : r.panels) {
      if (n >= p.sequence.size()) continue;
      out += std::to_string(r.indices[n]) + "," + p.id + "," + format_double(p.sequence[n].value) + "," +
             format_double(p.sequence[n].std_error) + "\n";
    }
  }
  for (const auto& p : r.panels) {
    out += "limit," + p.id + "," + format_double(p.limit.value) + "," + format_double(p.limit.std_error) + "\n";
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << content;
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace epilab
