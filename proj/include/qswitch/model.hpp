#pragma once

// Switch topology: a hub with one link per user, and bipartite flows between
// pairs of users.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qswitch/link_formulas.hpp"

namespace qswitch {

inline void require_probability(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error(std::string(what) + " must be a probability in [0,1], got " +
                            std::to_string(x));
  }
}

struct DirectSource {
  bool operator==(const DirectSource&) const = default;
};

struct DerivedSource {
  double pnla = 1.0;
  long long m = 1;
  bool operator==(const DerivedSource&) const = default;
};

using LinkSource = std::variant<DirectSource, DerivedSource>;

/// Per-step heralding probability of one hub-user link.
struct LinkParam {
  double p = 0.0;
  LinkSource source = DirectSource{};

  static LinkParam direct(double p) {
    require_probability(p, "link p");
    return LinkParam{p, DirectSource{}};
  }

  static LinkParam derived(double pnla, long long m) {
    return LinkParam{herald_prob(pnla, m), DerivedSource{pnla, m}};
  }

  bool is_derived() const { return std::holds_alternative<DerivedSource>(source); }

  bool operator==(const LinkParam&) const = default;
};

/// A bipartite entanglement flow. `users` holds positions into
/// SwitchTopology::users, which are also the link indices.
struct FlowSpec {
  std::size_t id = 0;
  std::pair<std::size_t, std::size_t> users{0, 1};
  double q = 1.0;
  std::optional<double> rci;

  static constexpr double kDefaultRci = 1.0;

  double rci_or_default() const { return rci.value_or(kDefaultRci); }

  bool touches(std::size_t user) const { return users.first == user || users.second == user; }

  bool shares_user(const FlowSpec& other) const {
    return touches(other.users.first) || touches(other.users.second);
  }

  bool operator==(const FlowSpec&) const = default;
};

struct SwitchTopology {
  std::vector<int> users;  // display identifiers; user j owns links[j]
  std::vector<LinkParam> links;
  std::vector<FlowSpec> flows;

  std::size_t num_users() const { return users.size(); }
  std::size_t num_links() const { return links.size(); }
  std::size_t num_flows() const { return flows.size(); }

  std::vector<double> link_probs() const {
    std::vector<double> out;
    out.reserve(links.size());
    for (const auto& l : links) out.push_back(l.p);
    return out;
  }

  std::vector<double> swap_probs() const {
    std::vector<double> out;
    out.reserve(flows.size());
    for (const auto& f : flows) out.push_back(f.q);
    return out;
  }

  bool operator==(const SwitchTopology&) const = default;
};

enum class ScenarioTag { A, B, C };

inline const char* to_string(ScenarioTag tag) {
  switch (tag) {
    case ScenarioTag::A: return "A";
    case ScenarioTag::B: return "B";
    case ScenarioTag::C: return "C";
  }
  return "?";
}

inline ScenarioTag parse_scenario_tag(const std::string& s) {
  if (s == "A" || s == "a") return ScenarioTag::A;
  if (s == "B" || s == "b") return ScenarioTag::B;
  if (s == "C" || s == "c") return ScenarioTag::C;
  throw std::invalid_argument("unknown scenario tag '" + s + "' (expected A, B or C)");
}

struct Scenario {
  ScenarioTag tag;
  SwitchTopology topology;
};

namespace detail {

inline SwitchTopology uniform_topology(std::size_t n_users,
                                       const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                       const LinkParam& link, double q) {
  SwitchTopology topo;
  for (std::size_t j = 0; j < n_users; ++j) {
    topo.users.push_back(static_cast<int>(j + 1));
    topo.links.push_back(link);
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    topo.flows.push_back(FlowSpec{i, pairs[i], q, std::nullopt});
  }
  return topo;
}

inline std::vector<std::pair<std::size_t, std::size_t>> scenario_pairs(ScenarioTag tag) {
  // 0-based user positions; users are displayed as 1..n
  switch (tag) {
    case ScenarioTag::A: return {{0, 1}, {1, 2}, {0, 2}};
    case ScenarioTag::B: return {{0, 1}, {1, 2}, {2, 3}};
    case ScenarioTag::C: return {{0, 1}, {2, 3}, {4, 5}};
  }
  return {};
}

inline std::size_t scenario_users(ScenarioTag tag) {
  switch (tag) {
    case ScenarioTag::A: return 3;
    case ScenarioTag::B: return 4;
    case ScenarioTag::C: return 6;
  }
  return 0;
}

}  // namespace detail

/// Canonical 3-flow layouts:
///   A: (1,2) (2,3) (1,3), every pair of flows contends
///   B: (1,2) (2,3) (3,4), flows 1 and 3 are disjoint
///   C: (1,2) (3,4) (5,6), no contention
inline Scenario build_scenario(ScenarioTag tag, const LinkParam& link, double q) {
  require_probability(link.p, "link p");
  require_probability(q, "swap q");
  if (q == 0.0) {
    throw std::domain_error("swap q must be positive");
  }
  return Scenario{tag, detail::uniform_topology(detail::scenario_users(tag),
                                                detail::scenario_pairs(tag), link, q)};
}

inline Scenario build_scenario(ScenarioTag tag, double p, double q) {
  require_probability(p, "link p");
  return build_scenario(tag, LinkParam::direct(p), q);
}

/// All invariant violations of `topo`; empty means valid.
inline std::vector<std::string> validate(const SwitchTopology& topo) {
  std::vector<std::string> out;
  if (topo.links.size() != topo.users.size()) {
    out.push_back("one link per user: " + std::to_string(topo.users.size()) + " users but " +
                  std::to_string(topo.links.size()) + " links");
  }
  for (std::size_t a = 0; a < topo.users.size(); ++a) {
    for (std::size_t b = a + 1; b < topo.users.size(); ++b) {
      if (topo.users[a] == topo.users[b]) {
        out.push_back("duplicate user identifier " + std::to_string(topo.users[a]));
      }
    }
  }
  for (std::size_t j = 0; j < topo.links.size(); ++j) {
    const auto& l = topo.links[j];
    if (!(l.p >= 0.0 && l.p <= 1.0)) {
      out.push_back("link " + std::to_string(j + 1) + ": p must lie in [0,1]");
    }
    if (const auto* d = std::get_if<DerivedSource>(&l.source)) {
      if (!(d->pnla > 0.0 && d->pnla <= 1.0) || d->m < 1) {
        out.push_back("link " + std::to_string(j + 1) + ": derived source needs pnla in (0,1] and m >= 1");
      } else if (l.p != herald_prob(d->pnla, d->m)) {
        out.push_back("link " + std::to_string(j + 1) + ": p disagrees with 1-(1-pnla)^m");
      }
    }
  }
  const std::size_t n = topo.users.size();
  for (std::size_t i = 0; i < topo.flows.size(); ++i) {
    const auto& f = topo.flows[i];
    const std::string tag = "flow " + std::to_string(i + 1) + ": ";
    if (f.id != i) {
      out.push_back(tag + "id must equal its position");
    }
    if (f.users.first == f.users.second) {
      out.push_back(tag + "flow users must be distinct");
    }
    if (f.users.first >= n || f.users.second >= n) {
      out.push_back(tag + "user index out of range");
    }
    if (!(f.q > 0.0 && f.q <= 1.0)) {
      out.push_back(tag + "q must lie in (0,1]");
    }
    if (f.rci && !(*f.rci >= 0.0 && std::isfinite(*f.rci))) {
      out.push_back(tag + "rci must be a nonnegative finite number");
    }
    for (std::size_t m = 0; m < i; ++m) {
      const auto& g = topo.flows[m];
      const bool same = (f.users == g.users) ||
                        (f.users.first == g.users.second && f.users.second == g.users.first);
      if (same) {
        out.push_back(tag + "duplicates the user set of flow " + std::to_string(m + 1));
      }
    }
  }
  return out;
}

inline bool is_valid(const SwitchTopology& topo) { return validate(topo).empty(); }

inline void require_valid(const SwitchTopology& topo) {
  auto v = validate(topo);
  if (!v.empty()) {
    std::string msg = "invalid topology:";
    for (const auto& s : v) msg += "\n  " + s;
    throw std::invalid_argument(msg);
  }
}

/// adjacency[i][m] is true iff flows i and m share a user (i != m).
using ContentionGraph = std::vector<std::vector<bool>>;

inline ContentionGraph contention_graph(const SwitchTopology& topo) {
  const std::size_t k = topo.flows.size();
  ContentionGraph g(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t m = 0; m < k; ++m) {
      if (i != m && topo.flows[i].shares_user(topo.flows[m])) g[i][m] = true;
    }
  }
  return g;
}

}  // namespace qswitch
