#pragma once

// Grid sweeps over request-rate vectors: one simulation per grid point and
// repetition, classified and optionally compared against an analytic region.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qswitch/linkgen.hpp"
#include "qswitch/model.hpp"
#include "qswitch/region.hpp"
#include "qswitch/simulator.hpp"
#include "qswitch/stability.hpp"

namespace qswitch {

struct GridAxis {
  double min = 0.0;
  double max = 1.0;
  double step = 0.02;

  std::size_t count() const {
    if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
    if (max < min) throw std::invalid_argument("grid max must not be below min");
    return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
  }

  double value(std::size_t k) const { return min + static_cast<double>(k) * step; }
};

/// Desk-scale defaults.
inline constexpr double kDefaultGridStep = 0.02;
inline constexpr std::uint64_t kDefaultSweepSteps = 20000;
/// Settings of the full-resolution reference grids.
inline constexpr double kReferenceGridStep = 0.005;
inline constexpr std::uint64_t kReferenceSweepSteps = 100000;
inline constexpr double kDefaultStepBudget = 5e10;

class ResourceCapError : public std::runtime_error {
 public:
  ResourceCapError(double estimate, double cap)
      : std::runtime_error("sweep needs about " + compact(estimate) + " simulated steps, above the cap of " +
                           compact(cap)),
        estimate_steps(estimate),
        cap_steps(cap) {}

  double estimate_steps;
  double cap_steps;

 private:
  static std::string compact(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", x);
    return buf;
  }
};

struct SweepSpec {
  SimConfig base;  // arrival rates are overwritten per point; steps is the horizon
  std::vector<GridAxis> axes;
  std::size_t repetitions = 1;
  std::optional<RateRegion> region;
  double threshold = kDefaultSlopeThreshold;
  SlopeBasis basis = SlopeBasis::total;
  unsigned threads = 0;  // 0 = hardware concurrency
  double step_budget = kDefaultStepBudget;
  std::function<void(std::size_t done, std::size_t total)> progress;

  std::size_t num_points() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.count();
    return n;
  }

  double estimated_steps() const {
    return static_cast<double>(num_points()) * static_cast<double>(repetitions) * static_cast<double>(base.steps);
  }
};

/// Uniform grid with the same axis for every flow.
inline std::vector<GridAxis> uniform_axes(std::size_t num_flows, double min, double max, double step) {
  return std::vector<GridAxis>(num_flows, GridAxis{min, max, step});
}

struct SweepRecord {
  std::vector<std::size_t> coords;
  std::vector<double> lambda;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  double slope = 0.0;
  bool stable = true;
  bool conserved = true;  // arrivals - services matched the final queues
  std::optional<bool> inside;
  std::optional<double> distance;  // signed, see boundary_distance

  std::optional<bool> agree() const {
    if (!inside) return std::nullopt;
    return *inside == stable;
  }
};

struct SweepResult {
  std::vector<std::pair<std::size_t, std::size_t>> flow_users;
  std::vector<double> swap_probs;
  std::vector<GridAxis> axes;
  std::vector<SweepRecord> records;  // sorted by grid coordinates, then repetition

  double grid_step() const {
    double s = 0.0;
    for (const auto& a : axes) s = std::max(s, a.step);
    return s;
  }
};

/// Seed of one grid point, independent of the rest of the grid.
inline std::uint64_t point_seed(std::uint64_t base, std::span<const std::size_t> coords, std::size_t repetition) {
  std::uint64_t s = mix64(base);
  for (auto c : coords) s = combine_seed(s, c);
  return combine_seed(s, repetition);
}

namespace detail {

inline std::vector<std::size_t> unflatten(std::size_t index, const std::vector<GridAxis>& axes) {
  // last axis varies fastest
  std::vector<std::size_t> coords(axes.size());
  for (std::size_t d = axes.size(); d-- > 0;) {
    const std::size_t n = axes[d].count();
    coords[d] = index % n;
    index /= n;
  }
  return coords;
}

}  // namespace detail

inline SweepRecord run_point(const SweepSpec& spec, std::span<const std::size_t> coords, std::size_t repetition) {
  SweepRecord rec;
  rec.coords.assign(coords.begin(), coords.end());
  rec.repetition = repetition;
  for (std::size_t d = 0; d < coords.size(); ++d) rec.lambda.push_back(spec.axes[d].value(coords[d]));
  rec.seed = point_seed(spec.base.seed, coords, repetition);

  SimConfig cfg = spec.base;
  cfg.arrivals.rates = rec.lambda;
  cfg.seed = rec.seed;
  cfg.record_per_flow = spec.basis == SlopeBasis::per_flow_max;
  const auto trace = run(cfg);
  const auto verdict = classify(trace, spec.threshold, spec.basis);
  rec.slope = verdict.slope;
  rec.stable = verdict.stable;
  rec.conserved = trace.conserves();
  if (spec.region) {
    const auto q = spec.base.topology.swap_probs();
    rec.inside = contains(*spec.region, rec.lambda, q);
    rec.distance = boundary_distance(*spec.region, detail::scheduling_rates(rec.lambda, q));
  }
  return rec;
}

/// Runs every grid point on a worker pool. Output order is fixed by grid
/// coordinates regardless of completion order.
inline SweepResult run_sweep(const SweepSpec& spec) {
  require_valid(spec.base.topology);
  if (spec.axes.size() != spec.base.topology.num_flows()) {
    throw std::invalid_argument("sweep needs one grid axis per flow");
  }
  if (spec.repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  if (spec.base.steps < 1) throw std::invalid_argument("simulation horizon must be at least one step");
  for (const auto& a : spec.axes) {
    a.count();
    if (!(a.min >= 0.0)) throw std::domain_error("grid rates must be nonnegative");
  }
  if (spec.region && spec.region->num_flows != spec.axes.size()) {
    throw std::invalid_argument("comparison region has a different number of flows");
  }
  const double estimate = spec.estimated_steps();
  if (estimate > spec.step_budget) throw ResourceCapError(estimate, spec.step_budget);
  // reject invalid rates (e.g. bernoulli above 1) before any work starts
  {
    ArrivalModel probe = spec.base.arrivals;
    probe.rates.clear();
    for (const auto& a : spec.axes) probe.rates.push_back(a.value(a.count() - 1));
    probe.check(spec.axes.size());
  }

  const std::size_t points = spec.num_points();
  const std::size_t jobs = points * spec.repetitions;
  SweepResult result;
  result.flow_users = flow_user_pairs(spec.base.topology);
  result.swap_probs = spec.base.topology.swap_probs();
  result.axes = spec.axes;
  result.records.resize(jobs);

  unsigned workers = spec.threads != 0 ? spec.threads : std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, jobs));

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mu;
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto work = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= jobs) return;
      try {
        const auto coords = detail::unflatten(job / spec.repetitions, spec.axes);
        result.records[job] = run_point(spec, coords, job % spec.repetitions);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(jobs);
        return;
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (spec.progress) {
        std::lock_guard lock(progress_mu);
        spec.progress(d, jobs);
      }
    }
  };

  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

struct AgreementSummary {
  std::size_t stable_inside = 0;
  std::size_t stable_outside = 0;
  std::size_t unstable_inside = 0;
  std::size_t unstable_outside = 0;
  std::size_t far_points = 0;  // at least one grid step from the boundary
  std::size_t far_disagreements = 0;
  double margin = 0.0;

  std::size_t total() const { return stable_inside + stable_outside + unstable_inside + unstable_outside; }
  std::size_t disagreements() const { return stable_outside + unstable_inside; }

  double disagreement_fraction() const {
    return total() == 0 ? 0.0 : static_cast<double>(disagreements()) / static_cast<double>(total());
  }

  double far_disagreement_fraction() const {
    return far_points == 0 ? 0.0 : static_cast<double>(far_disagreements) / static_cast<double>(far_points);
  }
};

/// Confusion counts of simulated stability against region membership. The
/// far-from-boundary subset uses a margin of one grid step unless given.
inline AgreementSummary agreement_report(const SweepResult& result, const RateRegion& region,
                                         std::optional<double> margin = std::nullopt) {
  if (region.num_flows != result.flow_users.size()) {
    throw std::invalid_argument("region and sweep describe different numbers of flows");
  }
  if (!region.flow_users.empty() && region.flow_users != result.flow_users) {
    throw std::invalid_argument("region and sweep were built for different topologies");
  }
  AgreementSummary s;
  s.margin = margin.value_or(result.grid_step());
  for (const auto& r : result.records) {
    const bool inside = contains(region, r.lambda, result.swap_probs);
    if (r.stable) {
      ++(inside ? s.stable_inside : s.stable_outside);
    } else {
      ++(inside ? s.unstable_inside : s.unstable_outside);
    }
    const double d = boundary_distance(region, detail::scheduling_rates(r.lambda, result.swap_probs));
    if (std::abs(d) >= s.margin) {
      ++s.far_points;
      if (inside != r.stable) ++s.far_disagreements;
    }
  }
  return s;
}

/// lambda_i times the per-request entanglement yield of flow i (ebits per
/// step). Flows without a yield use FlowSpec::kDefaultRci.
inline std::vector<double> entanglement_rates(std::span<const double> lambda, std::span<const FlowSpec> flows) {
  if (lambda.size() != flows.size()) {
    throw std::domain_error("rate vector has " + std::to_string(lambda.size()) + " entries for " +
                            std::to_string(flows.size()) + " flows");
  }
  std::vector<double> out(lambda.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double rci = flows[i].rci_or_default();
    if (!(rci >= 0.0) || !std::isfinite(rci)) throw std::domain_error("rci must be nonnegative and finite");
    out[i] = lambda[i] * rci;
  }
  return out;
}

}  // namespace qswitch
