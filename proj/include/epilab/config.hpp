#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "epilab/error.hpp"
#include "epilab/format.hpp"
#include "epilab/grid.hpp"

namespace epilab {

/// Flat "key = value" text: one entry per line, '#' starts a comment,
/// blank lines ignored, duplicate keys rejected.
class FlatConfig {
 public:
  FlatConfig() = default;

  static FlatConfig parse(const std::string& text) {
    FlatConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw config_error("config line " + std::to_string(lineno) + ": expected 'key = value'");
      }
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw config_error("config line " + std::to_string(lineno) + ": empty key");
      if (c.values_.count(key)) throw config_error("config: duplicate key '" + key + "'");
      c.order_.push_back(key);
      c.values_.emplace(std::move(key), std::move(value));
    }
    return c;
  }

  static FlatConfig load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::vector<std::string>& keys() const noexcept { return order_; }

  std::optional<std::string> get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::string get_or(const std::string& key, const std::string& fallback) const { return get(key).value_or(fallback); }

  double number(const std::string& key, double fallback) const {
    const auto v = get(key);
    return v ? parse_double(*v, key.c_str()) : fallback;
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size() || v->empty()) {
      throw config_error(key + ": expected a non-negative integer, got '" + *v + "'");
    }
    return out;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::vector<double> out;
    for (const auto& tok : split(*v, ',')) out.push_back(parse_double(trim(tok), key.c_str()));
    return out;
  }

  void set(const std::string& key, std::string value) {
    if (!values_.count(key)) order_.push_back(key);
    values_[key] = std::move(value);
  }

  std::string to_text() const {
    std::string out;
    for (const auto& k : order_) out += k + " = " + values_.at(k) + "\n";
    return out;
  }

  static std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
  }

  static std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char ch : s) {
      if (ch == '(') ++depth;
      if (ch == ')') --depth;
      if (ch == sep && depth == 0) {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    out.push_back(cur);
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

inline constexpr const char* kGridKeys[] = {"dim", "lo", "hi", "h", "value_lo", "value_hi", "h_v"};

/// Reads the grid keys (all optional, defaults from GridSpec{}). For dim 2,
/// lo and hi take two comma-separated values; a single value is used for
/// both axes.
inline GridSpec grid_spec_from(const FlatConfig& c) {
  GridSpec g;
  const auto dim = c.count("dim", 1);
  if (dim != 1 && dim != 2) throw config_error("dim must be 1 or 2");
  g.dim = static_cast<int>(dim);
  auto axis_pair = [&](const char* key, std::array<double, 2> fallback) {
    const auto v = c.numbers(key, {});
    if (v.empty()) return fallback;
    if (v.size() == 1) return std::array<double, 2>{v[0], v[0]};
    if (v.size() == 2 && g.dim == 2) return std::array<double, 2>{v[0], v[1]};
    throw config_error(std::string(key) + ": expected one value per axis");
  };
  g.lo = axis_pair("lo", g.lo);
  g.hi = axis_pair("hi", g.hi);
  g.h = c.number("h", g.h);
  g.value_lo = c.number("value_lo", g.value_lo);
  g.value_hi = c.number("value_hi", g.value_hi);
  g.h_v = c.number("h_v", g.h_v);
  try {
    Grid check(g);
  } catch (const usage_error& e) {
    throw config_error(std::string("grid: ") + e.what());
  }
  return g;
}

inline std::string grid_spec_to_text(const GridSpec& g) {
  auto axis = [&](const std::array<double, 2>& v) {
    return g.dim == 1 ? format_double(v[0]) : format_double(v[0]) + ", " + format_double(v[1]);
  };
  std::string out;
  out += "dim = " + std::to_string(g.dim) + "\n";
  out += "lo = " + axis(g.lo) + "\n";
  out += "hi = " + axis(g.hi) + "\n";
  out += "h = " + format_double(g.h) + "\n";
  out += "value_lo = " + format_double(g.value_lo) + "\n";
  out += "value_hi = " + format_double(g.value_hi) + "\n";
  out += "h_v = " + format_double(g.h_v) + "\n";
  return out;
}

inline GridSpec grid_spec_from_text(const std::string& text) { return grid_spec_from(FlatConfig::parse(text)); }

}  // namespace epilab
