#pragma once

// CSV and JSON output: simulation traces, regions, sweeps.

#include <charconv>
#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qswitch/config.hpp"
#include "qswitch/region.hpp"
#include "qswitch/simulator.hpp"
#include "qswitch/stability.hpp"
#include "qswitch/sweep.hpp"

namespace qswitch {

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string subset_label(FlowMask s) {
  std::string out = "{";
  bool first = true;
  for (auto i : subset_indices(s)) {
    if (!first) out += ",";
    out += std::to_string(i + 1);
    first = false;
  }
  return out + "}";
}

// --- simulation ---------------------------------------------------------

/// Header `step,q1,...,qK,qtotal`; one row per step with end-of-step queues.
inline void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  if (!trace.has_per_flow()) throw std::invalid_argument("trace was recorded without per-flow queue lengths");
  out << "step";
  for (std::size_t i = 0; i < trace.num_flows; ++i) out << ",q" << (i + 1);
  out << ",qtotal\n";
  for (std::uint64_t n = 0; n < trace.steps; ++n) {
    out << n;
    for (std::size_t i = 0; i < trace.num_flows; ++i) out << ',' << trace.queue(n, i);
    out << ',' << trace.total[n] << '\n';
  }
}

inline nlohmann::json verdict_json(const StabilityVerdict& v) {
  return {{"slope", v.slope}, {"threshold", v.threshold}, {"stable", v.stable}, {"basis", to_string(v.basis)}};
}

inline nlohmann::json simulation_summary_json(const SimConfig& cfg, const SimTrace& trace, const StabilityVerdict& v) {
  nlohmann::json j;
  j["config"] = {{"topology", topology_to_json(cfg.topology)},
                 {"arrivals", {{"kind", to_string(cfg.arrivals.kind)}, {"rates", cfg.arrivals.rates}}},
                 {"rule", to_string(cfg.rule)},
                 {"steps", cfg.steps},
                 {"seed", cfg.seed},
                 {"tie_break", to_string(cfg.tie)}};
  j["arrivals"] = trace.arrivals;
  j["services"] = trace.services;
  j["swap_failures"] = trace.swap_failures;
  j["final_queues"] = trace.final_queues;
  if (!trace.mean_wait.empty()) j["mean_wait"] = trace.mean_wait;
  j["verdict"] = verdict_json(v);
  return j;
}

// --- regions ------------------------------------------------------------

inline nlohmann::json region_json(const RateRegion& region) {
  const auto binding = binding_facets(region);
  auto is_binding = [&](FlowMask s) {
    for (const auto& b : binding) {
      if (b.subset == s) return true;
    }
    return false;
  };
  nlohmann::json j;
  j["rule"] = to_string(region.rule);
  j["num_flows"] = region.num_flows;
  j["bounds"] = nlohmann::json::array();
  for (const auto& b : region.bounds) {
    std::vector<std::size_t> idx;
    for (auto i : subset_indices(b.subset)) idx.push_back(i + 1);
    j["bounds"].push_back({{"subset", idx}, {"bound", b.bound}, {"binding", is_binding(b.subset)}});
  }
  return j;
}

/// CSV `subset,bound,binding`, subsets written as `1+3`.
inline void write_region_csv(std::ostream& out, const RateRegion& region) {
  const auto binding = binding_facets(region);
  out << "subset,bound,binding\n";
  for (const auto& b : region.bounds) {
    bool bind = false;
    for (const auto& f : binding) bind = bind || f.subset == b.subset;
    std::string label;
    for (auto i : subset_indices(b.subset)) label += (label.empty() ? "" : "+") + std::to_string(i + 1);
    out << label << ',' << format_double(b.bound) << ',' << (bind ? 1 : 0) << '\n';
  }
}

/// Grid samples of region membership over [0,1]^3, header
/// `lam1,lam2,lam3,in_region`.
inline void write_region_samples_csv(std::ostream& out, const RateRegion& region, double step,
                                     const std::vector<double>& q = {}) {
  if (region.num_flows != 3) throw std::invalid_argument("boundary samples are written for three flows only");
  const GridAxis axis{0.0, 1.0, step};
  const std::size_t n = axis.count();
  out << "lam1,lam2,lam3,in_region\n";
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t c = 0; c < n; ++c) {
        const std::vector<double> lam{axis.value(a), axis.value(b), axis.value(c)};
        out << format_double(lam[0]) << ',' << format_double(lam[1]) << ',' << format_double(lam[2]) << ','
            << (contains(region, lam, q) ? 1 : 0) << '\n';
      }
    }
  }
}

// --- sweeps -------------------------------------------------------------

/// Header `lam1,...,lamK,slope,stable,inside,agree`. inside and agree are
/// empty when the sweep had no comparison region.
inline void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  const std::size_t k = result.axes.size();
  for (std::size_t i = 0; i < k; ++i) out << "lam" << (i + 1) << ',';
  out << "slope,stable,inside,agree\n";
  for (const auto& r : result.records) {
    for (double l : r.lambda) out << format_double(l) << ',';
    out << format_double(r.slope) << ',' << (r.stable ? 1 : 0) << ',';
    if (r.inside) out << (*r.inside ? 1 : 0);
    out << ',';
    if (const auto a = r.agree()) out << (*a ? 1 : 0);
    out << '\n';
  }
}

struct SweepPoint {
  std::vector<double> lambda;
  double slope = 0.0;
  bool stable = true;
};

/// Reads back the output of write_sweep_csv.
inline std::vector<SweepPoint> read_sweep_csv(std::istream& in, std::size_t* num_flows = nullptr) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("sweep CSV is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::size_t k = 0;
  while (k < header.size() && header[k] == "lam" + std::to_string(k + 1)) ++k;
  if (k == 0 || header.size() != k + 4 || header[k] != "slope" || header[k + 1] != "stable") {
    throw std::invalid_argument("not a sweep CSV (unexpected header)");
  }
  if (num_flows) *num_flows = k;
  std::vector<SweepPoint> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < header.size()) cells.emplace_back();
    try {
      SweepPoint p;
      for (std::size_t i = 0; i < k; ++i) p.lambda.push_back(std::stod(cells[i]));
      p.slope = std::stod(cells[k]);
      p.stable = cells[k + 1] == "1";
      out.push_back(std::move(p));
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed sweep CSV row at line " + std::to_string(lineno));
    }
  }
  return out;
}

inline nlohmann::json agreement_json(const AgreementSummary& s) {
  return {{"stable_inside", s.stable_inside},
          {"stable_outside", s.stable_outside},
          {"unstable_inside", s.unstable_inside},
          {"unstable_outside", s.unstable_outside},
          {"disagreement_fraction", s.disagreement_fraction()},
          {"far_margin", s.margin},
          {"far_points", s.far_points},
          {"far_disagreements", s.far_disagreements},
          {"far_disagreement_fraction", s.far_disagreement_fraction()}};
}

inline nlohmann::json sweep_summary_json(const SweepSpec& spec, const SweepResult& result) {
  nlohmann::json j;
  j["topology"] = topology_to_json(spec.base.topology);
  j["rule"] = to_string(spec.base.rule);
  j["steps"] = spec.base.steps;
  j["seed"] = spec.base.seed;
  j["repetitions"] = spec.repetitions;
  j["threshold"] = spec.threshold;
  j["basis"] = to_string(spec.basis);
  j["axes"] = nlohmann::json::array();
  for (const auto& a : spec.axes) j["axes"].push_back({{"min", a.min}, {"max", a.max}, {"step", a.step}});
  j["records"] = result.records.size();
  std::size_t stable = 0;
  for (const auto& r : result.records) stable += r.stable ? 1 : 0;
  j["stable_records"] = stable;
  if (spec.region) j["agreement"] = agreement_json(agreement_report(result, *spec.region));
  return j;
}

}  // namespace qswitch
