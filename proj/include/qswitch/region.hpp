#pragma once

// Analytic stable-rate regions as families of subset bounds
//
//     sum_{i in S} lambda_i / q_i <= c_S        for every nonempty flow set S,
//
// where c_S is the expected number of flows of S the switch can serve in one
// step: the size of the largest matching among the flows of S serviceable in
// that step. When the flows of S pairwise contend this is simply the
// probability that at least one of them is serviceable.
//
// The link outcome space (down / up with orientation 0 / up with orientation
// 1, per link) is enumerated exactly.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "qswitch/model.hpp"
#include "qswitch/scheduler.hpp"

namespace qswitch {

inline constexpr std::size_t kMaxEnumeratedLinks = 20;

class EnumerationCapError : public std::length_error {
 public:
  using std::length_error::length_error;
};

inline std::vector<std::size_t> subset_indices(FlowMask s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; s != 0; ++i, s >>= 1) {
    if (s & 1U) out.push_back(i);
  }
  return out;
}

inline FlowMask subset_mask(std::span<const std::size_t> indices) {
  FlowMask m = 0;
  for (auto i : indices) m |= FlowMask{1} << i;
  return m;
}

inline FlowMask full_mask(std::size_t k) { return k >= 32 ? ~FlowMask{0} : (FlowMask{1} << k) - 1; }

inline std::size_t popcount(FlowMask m) { return static_cast<std::size_t>(__builtin_popcount(m)); }

/// Largest matching contained in each flow set T, indexed by mask.
inline std::vector<std::uint8_t> max_matching_sizes(const SwitchTopology& topo) {
  const std::size_t k = topo.num_flows();
  std::vector<std::uint8_t> best(std::size_t{1} << k, 0);
  for (const auto& m : enumerate_matchings(topo)) best[m.mask] = static_cast<std::uint8_t>(m.size());
  // best[T] = max over matchings M subset of T; propagate upward over supersets
  for (std::size_t bit = 0; bit < k; ++bit) {
    for (std::size_t t = 0; t < best.size(); ++t) {
      if (t & (std::size_t{1} << bit)) best[t] = std::max(best[t], best[t ^ (std::size_t{1} << bit)]);
    }
  }
  return best;
}

/// Probability of each serviceable-flow set, indexed by mask, under
/// independent links. Real may be an exact rational type.
template <typename Real = double>
std::vector<Real> serviceable_distribution(const SwitchTopology& topo, ServiceRule rule,
                                           std::size_t link_cap = kMaxEnumeratedLinks) {
  require_valid(topo);
  detail::check_flow_count(topo);
  const std::size_t k = topo.num_flows();

  // only links some flow uses affect the outcome
  std::vector<std::size_t> used;
  for (std::size_t j = 0; j < topo.num_links(); ++j) {
    for (const auto& f : topo.flows) {
      if (f.touches(j)) {
        used.push_back(j);
        break;
      }
    }
  }
  if (used.size() > link_cap) {
    throw EnumerationCapError("outcome enumeration over " + std::to_string(used.size()) +
                              " links exceeds the cap of " + std::to_string(link_cap));
  }

  const bool oriented = rule == ServiceRule::opposite_parity;
  // per-link outcome: 0 = down, 1 = up (orientation 0), 2 = up (orientation 1)
  struct Branch {
    std::uint8_t up;
    std::uint8_t orient;
  };
  const std::vector<Branch> branches =
      oriented ? std::vector<Branch>{{0, 0}, {1, 0}, {1, 1}} : std::vector<Branch>{{0, 0}, {1, 0}};

  std::vector<std::array<Real, 3>> weight(used.size());
  for (std::size_t u = 0; u < used.size(); ++u) {
    const Real p = Real(topo.links[used[u]].p);
    const Real one = Real(1);
    weight[u][0] = one - p;
    if (oriented) {
      weight[u][1] = p / Real(2);
      weight[u][2] = p / Real(2);
    } else {
      weight[u][1] = p;
      weight[u][2] = Real(0);
    }
  }

  std::vector<Real> bins(std::size_t{1} << k, Real(0));
  std::vector<Real> comp(std::is_floating_point_v<Real> ? bins.size() : 0, Real(0));
  LinkSnapshot snap = LinkSnapshot::all_up(topo.num_links());

  // depth-first over links carrying the running probability product
  auto visit = [&](auto&& self, std::size_t depth, const Real& prob) -> void {
    if (depth == used.size()) {
      const FlowMask s = serviceable_mask(topo, snap, rule);
      if constexpr (std::is_floating_point_v<Real>) {
        // Kahan compensated accumulation
        const Real y = prob - comp[s];
        const Real t = bins[s] + y;
        comp[s] = (t - bins[s]) - y;
        bins[s] = t;
      } else {
        bins[s] += prob;
      }
      return;
    }
    const std::size_t link = used[depth];
    for (std::size_t b = 0; b < branches.size(); ++b) {
      const Real& w = weight[depth][b];
      if (w == Real(0)) continue;
      snap.up[link] = branches[b].up;
      snap.orient[link] = branches[b].orient;
      self(self, depth + 1, Real(prob * w));
    }
  };
  visit(visit, 0, Real(1));
  return bins;
}

/// P(at least one flow of S is serviceable in a step).
template <typename Real = double>
Real serviceable_prob(const SwitchTopology& topo, FlowMask subset, ServiceRule rule) {
  if (subset == 0) throw std::invalid_argument("flow subset must be nonempty");
  const auto dist = serviceable_distribution<Real>(topo, rule);
  Real total(0);
  for (std::size_t s = 0; s < dist.size(); ++s) {
    if (s & subset) total += dist[s];
  }
  return total;
}

/// Expected number of flows of S that can be served together in a step.
template <typename Real = double>
Real service_capacity(const SwitchTopology& topo, FlowMask subset, ServiceRule rule) {
  if (subset == 0) throw std::invalid_argument("flow subset must be nonempty");
  const auto dist = serviceable_distribution<Real>(topo, rule);
  const auto best = max_matching_sizes(topo);
  Real total(0);
  for (std::size_t s = 0; s < dist.size(); ++s) {
    if (best[s & subset] != 0) total += dist[s] * Real(static_cast<int>(best[s & subset]));
  }
  return total;
}

struct SubsetBound {
  FlowMask subset = 0;
  double bound = 0.0;
};

/// Bounds for all 2^K - 1 nonempty flow sets, stored in increasing mask order
/// so that bounds[S - 1] is the bound of S.
struct RateRegion {
  std::size_t num_flows = 0;
  ServiceRule rule = ServiceRule::any_orientation;
  std::vector<SubsetBound> bounds;
  // user pairs of the flows the region describes
  std::vector<std::pair<std::size_t, std::size_t>> flow_users;

  double bound(FlowMask s) const {
    if (s == 0 || s > bounds.size()) throw std::out_of_range("no bound stored for subset");
    return bounds[s - 1].bound;
  }
};

inline std::vector<std::pair<std::size_t, std::size_t>> flow_user_pairs(const SwitchTopology& topo) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& f : topo.flows) out.push_back(f.users);
  return out;
}

inline RateRegion analytic_region(const SwitchTopology& topo, ServiceRule rule) {
  const auto dist = serviceable_distribution<double>(topo, rule);
  const auto best = max_matching_sizes(topo);
  const std::size_t k = topo.num_flows();
  RateRegion region;
  region.num_flows = k;
  region.rule = rule;
  region.flow_users = flow_user_pairs(topo);
  for (FlowMask s = 1; s <= full_mask(k); ++s) {
    double c = 0.0;
    double comp = 0.0;
    for (std::size_t t = 0; t < dist.size(); ++t) {
      const double y = dist[t] * best[t & s] - comp;
      const double sum = c + y;
      comp = (sum - c) - y;
      c = sum;
    }
    region.bounds.push_back(SubsetBound{s, std::clamp(c, 0.0, static_cast<double>(popcount(s)))});
  }
  return region;
}

/// The three canonical 3-flow layouts with uniform link probability p,
/// evaluated from closed-form expressions.
inline RateRegion closed_form_region_3flow(double p, ScenarioTag tag, ServiceRule rule) {
  require_probability(p, "link p");
  const double p2 = p * p;
  const double p3 = p2 * p;
  const double p4 = p3 * p;
  const bool parity = rule == ServiceRule::opposite_parity;

  std::array<double, 7> c{};  // indexed by mask - 1
  auto set = [&](FlowMask s, double v) { c[s - 1] = v; };
  const double single = parity ? p2 / 2.0 : p2;
  set(0b001, single);
  set(0b010, single);
  set(0b100, single);

  // two contending flows: three links, the shared one in the middle
  const double pair = parity ? p2 - p3 / 4.0 : p3 + 2.0 * (1.0 - p) * p2;
  switch (tag) {
    case ScenarioTag::A:
      set(0b011, pair);
      set(0b110, pair);
      set(0b101, pair);
      set(0b111, parity ? 3.0 * p2 / 2.0 - 3.0 * p3 / 4.0 : p3 + 3.0 * (1.0 - p) * p2);
      break;
    case ScenarioTag::B:
      // flows 1 and 3 are disjoint and can be served in the same step
      set(0b011, pair);
      set(0b110, pair);
      set(0b101, 2.0 * single);
      set(0b111, parity ? 3.0 * p2 / 2.0 - p3 / 2.0 + p4 / 8.0 : p3 + 3.0 * (1.0 - p) * p2 + p4);
      break;
    case ScenarioTag::C:
      set(0b011, 2.0 * single);
      set(0b110, 2.0 * single);
      set(0b101, 2.0 * single);
      set(0b111, 3.0 * single);
      break;
  }

  RateRegion region;
  region.num_flows = 3;
  region.rule = rule;
  region.flow_users = detail::scenario_pairs(tag);
  for (FlowMask s = 1; s <= 7; ++s) region.bounds.push_back(SubsetBound{s, c[s - 1]});
  return region;
}

namespace detail {

inline std::vector<double> scheduling_rates(std::span<const double> lambda, std::span<const double> q) {
  std::vector<double> x(lambda.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double qi = q.empty() ? 1.0 : q[i];
    x[i] = lambda[i] / qi;
  }
  return x;
}

inline double subset_sum(std::span<const double> x, FlowMask s) {
  double t = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if ((s >> i) & 1U) t += x[i];
  }
  return t;
}

inline void check_dimensions(const RateRegion& region, std::span<const double> lambda, std::span<const double> q) {
  if (lambda.size() != region.num_flows) {
    throw std::invalid_argument("rate vector length " + std::to_string(lambda.size()) +
                                " does not match the region's " + std::to_string(region.num_flows) + " flows");
  }
  if (!q.empty() && q.size() != lambda.size()) {
    throw std::invalid_argument("swap probability vector length does not match the rate vector");
  }
}

}  // namespace detail

/// Whether lambda satisfies every stored bound with at least `margin` to
/// spare. An empty q means q_i = 1.
inline bool contains(const RateRegion& region, std::span<const double> lambda, std::span<const double> q = {},
                     double margin = 0.0) {
  detail::check_dimensions(region, lambda, q);
  const auto x = detail::scheduling_rates(lambda, q);
  for (const auto& b : region.bounds) {
    if (detail::subset_sum(x, b.subset) > b.bound - margin) return false;
  }
  return true;
}

/// Bounds not implied by the others. A bound is dropped when it is no tighter
/// than the sum of the bounds of some split of S into two parts, or than an
/// irreducible bound of a strict superset.
inline std::vector<SubsetBound> binding_facets(const RateRegion& region, double tol = 1e-12) {
  const std::size_t n = region.bounds.size();
  std::vector<bool> split_redundant(n, false);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const FlowMask s = region.bounds[idx].subset;
    const double c = region.bounds[idx].bound;
    // proper nonempty subsets a with a < (s ^ a) enumerate each split once
    for (FlowMask a = (s - 1) & s; a != 0; a = (a - 1) & s) {
      const FlowMask b = s ^ a;
      if (a > b) continue;
      if (region.bound(a) + region.bound(b) <= c + tol) {
        split_redundant[idx] = true;
        break;
      }
    }
  }
  std::vector<SubsetBound> out;
  for (std::size_t idx = 0; idx < n; ++idx) {
    if (split_redundant[idx]) continue;
    const FlowMask s = region.bounds[idx].subset;
    const double c = region.bounds[idx].bound;
    bool implied = false;
    for (std::size_t j = 0; j < n && !implied; ++j) {
      const FlowMask t = region.bounds[j].subset;
      if (t != s && (t & s) == s && !split_redundant[j] && region.bounds[j].bound <= c + tol) implied = true;
    }
    if (!implied) out.push_back(region.bounds[idx]);
  }
  return out;
}

/// Largest t with t * direction inside the region, and the bound that stops
/// it. Direction entries are scheduling rates (already divided by q).
inline std::pair<double, FlowMask> ray_exit(const RateRegion& region, std::span<const double> direction) {
  detail::check_dimensions(region, direction, {});
  double best = std::numeric_limits<double>::infinity();
  FlowMask arg = 0;
  for (const auto& b : region.bounds) {
    const double d = detail::subset_sum(direction, b.subset);
    if (d <= 0.0) continue;
    const double t = b.bound / d;
    if (t < best) {
      best = t;
      arg = b.subset;
    }
  }
  return {best, arg};
}

inline constexpr std::size_t kExactDistanceFlows = 4;

namespace detail {

// Projection of x onto the affine set {y : a_r . y = b_r}; false if the rows
// are linearly dependent.
inline bool project_affine(std::span<const double> x, const std::vector<std::vector<double>>& a,
                           const std::vector<double>& b, std::vector<double>& y) {
  const std::size_t m = a.size();
  const std::size_t k = x.size();
  // solve (A A^T) z = A x - b, then y = x - A^T z
  std::vector<std::vector<double>> g(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t s = 0; s < m; ++s) {
      double dot = 0.0;
      for (std::size_t i = 0; i < k; ++i) dot += a[r][i] * a[s][i];
      g[r][s] = dot;
    }
    double ax = 0.0;
    for (std::size_t i = 0; i < k; ++i) ax += a[r][i] * x[i];
    g[r][m] = ax - b[r];
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (std::abs(g[r][col]) > std::abs(g[piv][col])) piv = r;
    }
    if (std::abs(g[piv][col]) < 1e-12) return false;
    std::swap(g[piv], g[col]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = g[r][col] / g[col][col];
      for (std::size_t c = col; c <= m; ++c) g[r][c] -= f * g[col][c];
    }
  }
  y.assign(x.begin(), x.end());
  for (std::size_t r = 0; r < m; ++r) {
    const double z = g[r][m] / g[r][r];
    for (std::size_t i = 0; i < k; ++i) y[i] -= z * a[r][i];
  }
  return true;
}

}  // namespace detail

/// Signed Euclidean distance from x (scheduling rates, x >= 0) to the region
/// boundary: positive inside, negative outside. Inside, the distance is
/// measured to the bound hyperplanes only (the coordinate planes are not a
/// stability boundary). Outside, it is the exact distance to the region
/// polytope for up to kExactDistanceFlows flows and a lower bound beyond.
inline double boundary_distance(const RateRegion& region, std::span<const double> x) {
  detail::check_dimensions(region, x, {});
  const std::size_t k = x.size();
  if (contains(region, x)) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& b : region.bounds) {
      d = std::min(d, (b.bound - detail::subset_sum(x, b.subset)) / std::sqrt(static_cast<double>(popcount(b.subset))));
    }
    return d;
  }

  double lower = 0.0;
  for (const auto& b : region.bounds) {
    lower = std::max(lower, (detail::subset_sum(x, b.subset) - b.bound) / std::sqrt(static_cast<double>(popcount(b.subset))));
  }
  if (k > kExactDistanceFlows) return -lower;

  // Constraint rows: every subset bound, then -y_i <= 0. The nearest point
  // lies on some face whose affine hull is cut out by at most k rows.
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (const auto& b : region.bounds) {
    std::vector<double> r(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) r[i] = ((b.subset >> i) & 1U) ? 1.0 : 0.0;
    rows.push_back(std::move(r));
    rhs.push_back(b.bound);
  }
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> r(k, 0.0);
    r[i] = -1.0;
    rows.push_back(std::move(r));
    rhs.push_back(0.0);
  }
  const std::size_t total = rows.size();
  auto feasible = [&](const std::vector<double>& y) {
    for (std::size_t r = 0; r < total; ++r) {
      double v = 0.0;
      for (std::size_t i = 0; i < k; ++i) v += rows[r][i] * y[i];
      if (v > rhs[r] + 1e-9) return false;
    }
    return true;
  };

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick;
  std::vector<double> y;
  auto search = [&](auto&& self, std::size_t start) -> void {
    if (!pick.empty()) {
      std::vector<std::vector<double>> a;
      std::vector<double> b;
      for (auto r : pick) {
        a.push_back(rows[r]);
        b.push_back(rhs[r]);
      }
      if (detail::project_affine(x, a, b, y) && feasible(y)) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < k; ++i) d2 += (y[i] - x[i]) * (y[i] - x[i]);
        best = std::min(best, std::sqrt(d2));
      }
    }
    if (pick.size() == k) return;
    for (std::size_t r = start; r < total; ++r) {
      pick.push_back(r);
      self(self, r + 1);
      pick.pop_back();
    }
  };
  search(search, 0);
  return std::isfinite(best) ? -best : -lower;
}

}  // namespace qswitch
