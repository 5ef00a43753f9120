#pragma once

// Discrete-time switch simulation.
//
// Within a step: arrivals are enqueued, the Max-Weight matching is computed on
// the updated queues, each scheduled flow attempts one swap, and every link
// entanglement left unused is dropped before the next step.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qswitch/linkgen.hpp"
#include "qswitch/model.hpp"
#include "qswitch/scheduler.hpp"

namespace qswitch {

enum class ArrivalKind { bernoulli, poisson };

inline const char* to_string(ArrivalKind k) { return k == ArrivalKind::bernoulli ? "bernoulli" : "poisson"; }

inline constexpr double kMaxPoissonRate = 500.0;

struct ArrivalModel {
  ArrivalKind kind = ArrivalKind::bernoulli;
  std::vector<double> rates;

  void check(std::size_t num_flows) const {
    if (rates.size() != num_flows) {
      throw std::invalid_argument("arrival rate vector has " + std::to_string(rates.size()) +
                                  " entries but topology has " + std::to_string(num_flows) + " flows");
    }
    for (double r : rates) {
      if (!(r >= 0.0) || !std::isfinite(r)) {
        throw std::domain_error("arrival rates must be nonnegative and finite");
      }
      if (kind == ArrivalKind::bernoulli && r > 1.0) {
        throw std::domain_error("bernoulli arrival rates must not exceed 1, got " + std::to_string(r));
      }
      if (kind == ArrivalKind::poisson && r > kMaxPoissonRate) {
        throw std::domain_error("poisson arrival rate above " + std::to_string(kMaxPoissonRate));
      }
    }
  }

  /// Requests of one flow arriving in `step`, from a single uniform draw.
  std::int64_t sample(std::size_t flow, const RngStream& rng, std::uint64_t step) const {
    const double u = rng.uniform(step, 0);
    const double rate = rates[flow];
    if (kind == ArrivalKind::bernoulli) return u < rate ? 1 : 0;
    // inversion of the Poisson CDF
    double pmf = std::exp(-rate);
    double cdf = pmf;
    std::int64_t n = 0;
    while (u >= cdf && pmf > 0.0) {
      ++n;
      pmf *= rate / static_cast<double>(n);
      cdf += pmf;
    }
    return n;
  }
};

struct SimConfig {
  SwitchTopology topology;
  ArrivalModel arrivals;
  ServiceRule rule = ServiceRule::any_orientation;
  std::uint64_t steps = 20000;
  std::uint64_t seed = 1;
  TieBreak tie = TieBreak::lowest_index;
  bool record_per_flow = true;
  bool track_waiting = false;

  void check() const {
    require_valid(topology);
    arrivals.check(topology.num_flows());
    if (steps < 1) throw std::invalid_argument("simulation horizon must be at least one step");
    if (topology.num_flows() > kMaxFlows) {
      throw std::length_error("at most " + std::to_string(kMaxFlows) + " flows are supported");
    }
  }
};

struct SimState {
  std::vector<std::int64_t> queues;
  std::vector<std::int64_t> arrivals;
  std::vector<std::int64_t> services;
  std::vector<std::int64_t> swap_failures;
  std::uint64_t step = 0;

  // FIFO arrival timestamps, only maintained when waiting times are tracked
  std::vector<std::deque<std::uint64_t>> arrival_times;
  std::vector<double> wait_sum;

  static SimState empty(std::size_t num_flows, bool track_waiting = false) {
    SimState s;
    s.queues.assign(num_flows, 0);
    s.arrivals.assign(num_flows, 0);
    s.services.assign(num_flows, 0);
    s.swap_failures.assign(num_flows, 0);
    if (track_waiting) {
      s.arrival_times.resize(num_flows);
      s.wait_sum.assign(num_flows, 0.0);
    }
    return s;
  }

  std::int64_t total_queue() const {
    std::int64_t t = 0;
    for (auto q : queues) t += q;
    return t;
  }
};

/// What happened in one step, for observers and invariant checks.
struct StepRecord {
  std::uint64_t step = 0;
  FlowMask serviceable = 0;  // flows serviceable under the active rule
  Matching scheduled;        // swaps attempted
  Matching served;           // swaps that succeeded
};

/// Per-flow swap streams.
class SwapRng {
 public:
  SwapRng(std::uint64_t seed, std::size_t num_flows) {
    for (std::size_t i = 0; i < num_flows; ++i) {
      streams_.emplace_back(seed, StreamKind::swap, static_cast<std::uint32_t>(i));
    }
  }
  const RngStream& operator[](std::size_t i) const { return streams_[i]; }

 private:
  std::vector<RngStream> streams_;
};

/// Advances `state` by one step given this step's link outcomes and arrivals.
/// A failed swap keeps its request at the head of the queue.
inline StepRecord step(const SwitchTopology& topo, const MaxWeightScheduler& scheduler, SimState& state,
                       const LinkSnapshot& snap, std::span<const std::int64_t> new_arrivals,
                       ServiceRule rule, const SwapRng& swap_rng, const RngStream* tie_rng = nullptr) {
  const std::size_t k = topo.num_flows();
  const bool track = !state.arrival_times.empty();
  StepRecord rec;
  rec.step = state.step;

  for (std::size_t i = 0; i < k; ++i) {
    const auto a = new_arrivals[i];
    state.queues[i] += a;
    state.arrivals[i] += a;
    if (track) {
      for (std::int64_t r = 0; r < a; ++r) state.arrival_times[i].push_back(state.step);
    }
  }

  rec.serviceable = serviceable_mask(topo, snap, rule);
  rec.scheduled = scheduler.select(snap, state.queues, rule, tie_rng);

  for (std::size_t i = 0; i < k; ++i) {
    if (!rec.scheduled.contains(i)) continue;
    if (swap_rng[i].uniform(state.step, 0) < topo.flows[i].q) {
      --state.queues[i];
      ++state.services[i];
      rec.served.mask |= FlowMask{1} << i;
      if (track) {
        state.wait_sum[i] += static_cast<double>(state.step - state.arrival_times[i].front());
        state.arrival_times[i].pop_front();
      }
    } else {
      ++state.swap_failures[i];
    }
  }
  ++state.step;
  return rec;
}

struct SimTrace {
  std::size_t num_flows = 0;
  std::uint64_t steps = 0;
  // Queue lengths at the end of each step: qlen[n * num_flows + i] (empty
  // when per-flow recording is off) and their per-step sum.
  std::vector<std::int64_t> qlen;
  std::vector<std::int64_t> total;
  std::vector<std::int64_t> arrivals;
  std::vector<std::int64_t> services;
  std::vector<std::int64_t> swap_failures;
  std::vector<std::int64_t> final_queues;
  std::vector<double> mean_wait;  // only with track_waiting

  bool has_per_flow() const { return !qlen.empty(); }

  std::int64_t queue(std::uint64_t n, std::size_t flow) const { return qlen[n * num_flows + flow]; }

  std::vector<std::int64_t> flow_series(std::size_t flow) const {
    std::vector<std::int64_t> out(steps);
    for (std::uint64_t n = 0; n < steps; ++n) out[n] = queue(n, flow);
    return out;
  }

  /// Q_i(N) = arrivals_i - services_i and services_i <= arrivals_i, from
  /// empty queues.
  bool conserves() const {
    for (std::size_t i = 0; i < num_flows; ++i) {
      if (final_queues[i] != arrivals[i] - services[i]) return false;
      if (services[i] > arrivals[i] || final_queues[i] < 0) return false;
    }
    return true;
  }
};

using StepObserver = std::function<void(const StepRecord&, const SimState&)>;

/// Runs `config.steps` steps from empty queues. Deterministic in the seed.
inline SimTrace run(const SimConfig& config, const StepObserver& observer = {}) {
  config.check();
  const auto& topo = config.topology;
  const std::size_t k = topo.num_flows();

  const MaxWeightScheduler scheduler(topo, config.tie);
  const LinkRng link_rng(config.seed, topo.num_links());
  const SwapRng swap_rng(config.seed, k);
  const RngStream tie_rng(config.seed, StreamKind::tie_break, 0);
  std::vector<RngStream> arrival_rng;
  for (std::size_t i = 0; i < k; ++i) {
    arrival_rng.emplace_back(config.seed, StreamKind::arrival, static_cast<std::uint32_t>(i));
  }

  SimTrace trace;
  trace.num_flows = k;
  trace.steps = config.steps;
  trace.total.resize(config.steps);
  if (config.record_per_flow) trace.qlen.resize(config.steps * k);

  SimState state = SimState::empty(k, config.track_waiting);
  LinkSnapshot snap;
  std::vector<std::int64_t> arr(k);
  for (std::uint64_t n = 0; n < config.steps; ++n) {
    for (std::size_t i = 0; i < k; ++i) arr[i] = config.arrivals.sample(i, arrival_rng[i], n);
    sample_links_into(topo, link_rng, n, snap);
    const auto rec = step(topo, scheduler, state, snap, arr, config.rule, swap_rng,
                          config.tie == TieBreak::seeded_random ? &tie_rng : nullptr);
    std::int64_t tot = 0;
    for (std::size_t i = 0; i < k; ++i) {
      tot += state.queues[i];
      if (config.record_per_flow) trace.qlen[n * k + i] = state.queues[i];
    }
    trace.total[n] = tot;
    if (observer) observer(rec, state);
  }

  trace.arrivals = state.arrivals;
  trace.services = state.services;
  trace.swap_failures = state.swap_failures;
  trace.final_queues = state.queues;
  if (config.track_waiting) {
    trace.mean_wait.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      trace.mean_wait[i] = state.services[i] > 0 ? state.wait_sum[i] / static_cast<double>(state.services[i]) : 0.0;
    }
  }
  return trace;
}

}  // namespace qswitch
