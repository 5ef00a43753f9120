#pragma once

// Matching enumeration and Max-Weight selection.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qswitch/linkgen.hpp"
#include "qswitch/model.hpp"

namespace qswitch {

inline constexpr std::size_t kMaxFlows = 20;

/// Flow set as a bitmask: bit i set means r_i = 1.
using FlowMask = std::uint32_t;

struct Matching {
  FlowMask mask = 0;

  bool contains(std::size_t flow) const { return (mask >> flow) & 1U; }
  std::size_t size() const { return static_cast<std::size_t>(__builtin_popcount(mask)); }

  std::vector<int> as_vector(std::size_t k) const {
    std::vector<int> r(k);
    for (std::size_t i = 0; i < k; ++i) r[i] = contains(i) ? 1 : 0;
    return r;
  }

  static Matching from_vector(std::span<const int> r) {
    Matching m;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i]) m.mask |= FlowMask{1} << i;
    }
    return m;
  }

  bool operator==(const Matching&) const = default;
};

enum class ServiceRule { any_orientation, opposite_parity };

enum class TieBreak { lowest_index, seeded_random };

inline const char* to_string(ServiceRule r) {
  return r == ServiceRule::any_orientation ? "any_orientation" : "opposite_parity";
}

inline const char* to_string(TieBreak t) {
  return t == TieBreak::lowest_index ? "lowest_index" : "seeded_random";
}

/// True iff no user appears in two flows of `mask`.
inline bool is_matching(const SwitchTopology& topo, FlowMask mask) {
  std::vector<int> load(topo.num_users(), 0);
  for (std::size_t i = 0; i < topo.num_flows(); ++i) {
    if (!((mask >> i) & 1U)) continue;
    const auto& f = topo.flows[i];
    if (++load[f.users.first] > 1 || ++load[f.users.second] > 1) return false;
  }
  return true;
}

namespace detail {

// Orders masks by the ascending list of their set flow indices, so that
// {} < {1} < {1,2} < {1,2,3} < {1,3} < {2} < ...
inline bool index_list_less(FlowMask a, FlowMask b) {
  while (a != 0 && b != 0) {
    const int ia = __builtin_ctz(a);
    const int ib = __builtin_ctz(b);
    if (ia != ib) return ia < ib;
    a &= a - 1;
    b &= b - 1;
  }
  return a == 0 && b != 0;
}

inline void check_flow_count(const SwitchTopology& topo) {
  if (topo.num_flows() > kMaxFlows) {
    throw std::length_error("matching enumeration supports at most " + std::to_string(kMaxFlows) +
                            " flows, topology has " + std::to_string(topo.num_flows()));
  }
}

}  // namespace detail

/// Every matching, including the empty one, ordered lexicographically by the
/// list of scheduled flow indices (lowest index first).
inline std::vector<Matching> enumerate_matchings(const SwitchTopology& topo) {
  detail::check_flow_count(topo);
  const std::size_t k = topo.num_flows();
  std::vector<FlowMask> masks;
  for (FlowMask m = 0; m < (FlowMask{1} << k); ++m) {
    if (is_matching(topo, m)) masks.push_back(m);
  }
  std::sort(masks.begin(), masks.end(), detail::index_list_less);
  std::vector<Matching> out;
  out.reserve(masks.size());
  for (auto m : masks) out.push_back(Matching{m});
  return out;
}

inline bool serviceable(const FlowSpec& flow, const LinkSnapshot& snap, ServiceRule rule) {
  const auto a = flow.users.first;
  const auto b = flow.users.second;
  if (!snap.up[a] || !snap.up[b]) return false;
  return rule == ServiceRule::any_orientation || snap.orient[a] != snap.orient[b];
}

inline FlowMask serviceable_mask(const SwitchTopology& topo, const LinkSnapshot& snap, ServiceRule rule) {
  FlowMask m = 0;
  for (std::size_t i = 0; i < topo.num_flows(); ++i) {
    if (serviceable(topo.flows[i], snap, rule)) m |= FlowMask{1} << i;
  }
  return m;
}

/// Per-flow Max-Weight coefficients q_i * Q_i * [serviceable_i].
inline std::vector<double> flow_weights(const SwitchTopology& topo, const LinkSnapshot& snap,
                                        std::span<const std::int64_t> queues, ServiceRule rule) {
  std::vector<double> w(topo.num_flows(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (queues[i] > 0 && serviceable(topo.flows[i], snap, rule)) {
      w[i] = topo.flows[i].q * static_cast<double>(queues[i]);
    }
  }
  return w;
}

inline double matching_weight(const Matching& m, std::span<const double> weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (m.contains(i)) s += weights[i];
  }
  return s;
}

/// Precomputed matching list for repeated scheduling on one topology.
class MaxWeightScheduler {
 public:
  explicit MaxWeightScheduler(const SwitchTopology& topo, TieBreak tie = TieBreak::lowest_index)
      : topo_(&topo), matchings_(enumerate_matchings(topo)), tie_(tie) {}

  const std::vector<Matching>& matchings() const { return matchings_; }

  /// Maximizes sum_i r_i q_i Q_i [serviceable_i] over all matchings. Only
  /// matchings whose every flow has positive weight are candidates, so the
  /// result never schedules an empty queue or an unserviceable flow. Ties go
  /// to the first candidate in enumeration order, or to a uniformly chosen
  /// candidate drawn from `tie_rng` at `step` under seeded_random.
  Matching select(const LinkSnapshot& snap, std::span<const std::int64_t> queues, ServiceRule rule,
                  const RngStream* tie_rng = nullptr) const {
    const std::size_t k = topo_->num_flows();
    FlowMask positive = 0;
    std::array<double, kMaxFlows> weights{};
    for (std::size_t i = 0; i < k; ++i) {
      if (queues[i] > 0 && serviceable(topo_->flows[i], snap, rule)) {
        weights[i] = topo_->flows[i].q * static_cast<double>(queues[i]);
        positive |= FlowMask{1} << i;
      }
    }
    if (positive == 0) return Matching{};

    double best = -1.0;
    Matching chosen{};
    std::size_t ties = 0;
    for (const auto& m : matchings_) {
      if ((m.mask & ~positive) != 0) continue;
      const double w = matching_weight(m, std::span<const double>(weights.data(), k));
      if (w > best) {
        best = w;
        chosen = m;
        ties = 1;
      } else if (w == best && tie_ == TieBreak::seeded_random && tie_rng != nullptr) {
        // reservoir sampling over the tied candidates, one draw per tie
        ++ties;
        if (tie_rng->uniform(snap.step, static_cast<std::uint32_t>(ties)) * static_cast<double>(ties) < 1.0) {
          chosen = m;
        }
      }
    }
    return chosen;
  }

 private:
  const SwitchTopology* topo_;
  std::vector<Matching> matchings_;
  TieBreak tie_;
};

/// One-shot Max-Weight selection. For repeated use build a MaxWeightScheduler.
inline Matching max_weight(const SwitchTopology& topo, const LinkSnapshot& snap,
                           std::span<const std::int64_t> queues, ServiceRule rule,
                           TieBreak tie = TieBreak::lowest_index, const RngStream* tie_rng = nullptr) {
  return MaxWeightScheduler(topo, tie).select(snap, queues, rule, tie_rng);
}

}  // namespace qswitch
