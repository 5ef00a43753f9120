#pragma once

// Topology configuration files (JSON).
//
// Either an explicit topology
//
//   { "users": [1, 2, 3],                      // or a count: "users": 3
//     "links": [ {"p": 0.632},
//                {"pnla": 0.01, "m": 100},     // m defaults to round(1/pnla)
//                {"eta": 1e-4, "c": 1.0, "m": 10} ],
//     "flows": [ {"users": [1, 2], "q": 1.0, "rci": 0.8}, ... ] }
//
// or a canonical three-flow layout
//
//   { "scenario": {"tag": "A", "p": 0.632, "q": 1.0} }   // or pnla (+ m)
//
// Flow endpoints name user identifiers, not positions.

#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qswitch/link_formulas.hpp"
#include "qswitch/model.hpp"

namespace qswitch {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double number_field(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return it->get<double>();
}

inline long long integer_field(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer()) throw ConfigError(where + ": '" + key + "' must be an integer");
  return it->get<long long>();
}

inline LinkParam parse_link(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  if (j.contains("p")) {
    if (j.contains("pnla") || j.contains("eta")) throw ConfigError(where + ": give either p or pnla/eta, not both");
    return LinkParam::direct(number_field(j, "p", where));
  }
  double pnla = 0.0;
  if (j.contains("pnla")) {
    pnla = number_field(j, "pnla", where);
  } else if (j.contains("eta")) {
    const double c = j.contains("c") ? number_field(j, "c", where) : 1.0;
    pnla = pnla_from_transmissivity(number_field(j, "eta", where), c);
  } else {
    throw ConfigError(where + ": needs 'p', 'pnla' or 'eta'");
  }
  const long long m = j.contains("m") ? integer_field(j, "m", where) : saturation_channels(pnla);
  return LinkParam::derived(pnla, m);
}

inline SwitchTopology parse_explicit(const nlohmann::json& j) {
  SwitchTopology topo;
  const auto users = j.find("users");
  if (users == j.end()) throw ConfigError("config: missing 'users'");
  if (users->is_number_integer()) {
    const auto n = users->get<long long>();
    if (n < 0) throw ConfigError("config: 'users' count must be nonnegative");
    for (long long u = 1; u <= n; ++u) topo.users.push_back(static_cast<int>(u));
  } else if (users->is_array()) {
    for (const auto& u : *users) {
      if (!u.is_number_integer()) throw ConfigError("config: user identifiers must be integers");
      topo.users.push_back(u.get<int>());
    }
  } else {
    throw ConfigError("config: 'users' must be a count or a list of identifiers");
  }

  const auto links = j.find("links");
  if (links == j.end() || !links->is_array()) throw ConfigError("config: 'links' must be a list");
  for (std::size_t l = 0; l < links->size(); ++l) {
    topo.links.push_back(parse_link((*links)[l], "links[" + std::to_string(l) + "]"));
  }

  const auto flows = j.find("flows");
  if (flows == j.end() || !flows->is_array()) throw ConfigError("config: 'flows' must be a list");
  auto position = [&](const nlohmann::json& id, const std::string& where) -> std::size_t {
    if (!id.is_number_integer()) throw ConfigError(where + ": user identifiers must be integers");
    const int v = id.get<int>();
    for (std::size_t u = 0; u < topo.users.size(); ++u) {
      if (topo.users[u] == v) return u;
    }
    throw ConfigError(where + ": unknown user " + std::to_string(v));
  };
  for (std::size_t i = 0; i < flows->size(); ++i) {
    const auto& f = (*flows)[i];
    const std::string where = "flows[" + std::to_string(i) + "]";
    if (!f.is_object()) throw ConfigError(where + ": expected an object");
    const auto u = f.find("users");
    if (u == f.end() || !u->is_array() || u->size() != 2) {
      throw ConfigError(where + ": 'users' must list exactly two users");
    }
    FlowSpec spec;
    spec.id = i;
    spec.users = {position((*u)[0], where), position((*u)[1], where)};
    spec.q = f.contains("q") ? number_field(f, "q", where) : 1.0;
    if (f.contains("rci")) spec.rci = number_field(f, "rci", where);
    topo.flows.push_back(spec);
  }
  return topo;
}

inline SwitchTopology parse_scenario(const nlohmann::json& s) {
  if (!s.is_object()) throw ConfigError("config: 'scenario' must be an object");
  const auto tag = s.find("tag");
  if (tag == s.end() || !tag->is_string()) throw ConfigError("scenario: 'tag' must be one of A, B, C");
  ScenarioTag t;
  try {
    t = parse_scenario_tag(tag->get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  const LinkParam link = parse_link(s, "scenario");
  const double q = s.contains("q") ? number_field(s, "q", "scenario") : 1.0;
  return build_scenario(t, link, q).topology;
}

}  // namespace detail

inline SwitchTopology topology_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  SwitchTopology topo;
  try {
    topo = j.contains("scenario") ? detail::parse_scenario(j.at("scenario")) : detail::parse_explicit(j);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  const auto violations = validate(topo);
  if (!violations.empty()) {
    std::string msg = "config: invalid topology";
    for (const auto& v : violations) msg += "\n  " + v;
    throw ConfigError(msg);
  }
  return topo;
}

inline SwitchTopology topology_from_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  return topology_from_json(j);
}

inline SwitchTopology load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return topology_from_string(ss.str());
}

inline nlohmann::json topology_to_json(const SwitchTopology& topo) {
  nlohmann::json j;
  j["users"] = topo.users;
  j["links"] = nlohmann::json::array();
  for (const auto& l : topo.links) {
    nlohmann::json lj;
    if (const auto* d = std::get_if<DerivedSource>(&l.source)) {
      lj["pnla"] = d->pnla;
      lj["m"] = d->m;
      lj["herald_p"] = l.p;
    } else {
      lj["p"] = l.p;
    }
    j["links"].push_back(lj);
  }
  j["flows"] = nlohmann::json::array();
  for (const auto& f : topo.flows) {
    nlohmann::json fj;
    fj["users"] = {topo.users.at(f.users.first), topo.users.at(f.users.second)};
    fj["q"] = f.q;
    if (f.rci) fj["rci"] = *f.rci;
    j["flows"].push_back(fj);
  }
  return j;
}

}  // namespace qswitch
