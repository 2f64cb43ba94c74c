#pragma once

// Config serialization: CSV rows `site,x1,x2` and JSON {"sites":[[x1,x2],...]}.
// Both use shortest round-trip decimals, so write -> read is bit-exact.

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "core_state.hpp"
#include "format.hpp"

namespace catalytic {

inline std::string pairs_to_csv(const std::vector<TypePair>& v) {
  std::string out = "site,x1,x2\n";
  for (Site k = 0; k < v.size(); ++k) {
    out += std::to_string(k);
    out += ',';
    out += format_double(v[k].x1);
    out += ',';
    out += format_double(v[k].x2);
    out += '\n';
  }
  return out;
}

inline std::vector<TypePair> pairs_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<TypePair> v;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("site", 0) == 0) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c))
      throw std::invalid_argument("config csv line " + std::to_string(lineno) + ": expected site,x1,x2");
    const auto site = static_cast<std::size_t>(parse_double(a));
    if (site != v.size())
      throw std::invalid_argument("config csv line " + std::to_string(lineno) + ": sites must be listed in order");
    v.push_back({parse_double(b), parse_double(c)});
  }
  return v;
}

inline std::string pairs_to_json(const std::vector<TypePair>& v) {
  std::string out = "{\"sites\":[";
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ',';
    out += '[' + format_double(v[k].x1) + ',' + format_double(v[k].x2) + ']';
  }
  out += "]}";
  return out;
}

inline std::vector<TypePair> pairs_from_json(const nlohmann::json& j) {
  const nlohmann::json& arr = j.is_object() ? j.at("sites") : j;
  if (!arr.is_array()) throw std::invalid_argument("config json: expected an array of [x1,x2] pairs");
  std::vector<TypePair> v;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2) throw std::invalid_argument("config json: each site must be [x1,x2]");
    v.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return v;
}

inline std::vector<TypePair> pairs_from_json(const std::string& text) {
  return pairs_from_json(nlohmann::json::parse(text));
}

inline Config config_from_pairs(std::vector<TypePair> v, bool e_constrained) {
  Config c(std::move(v), e_constrained);
  if (!all_finite_nonnegative(c)) throw std::invalid_argument("config: masses must be finite and nonnegative");
  if (e_constrained && !validate_E(c)) throw std::invalid_argument("config: a site carries both types");
  return c;
}

}  // namespace catalytic
