#pragma once

// qswitch command line: region, simulate, sweep, plot, capacity.
//
// Exit codes: 0 success, 1 usage, 2 configuration, 3 resource cap.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qswitch/qswitch.hpp"

namespace qswitch::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kConfig = 2, kResource = 3 };

inline constexpr double kDefaultLinkP = 0.632;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TopologyFlags {
  std::string config;
  std::string scenario = "a";
  std::optional<double> p;
  double q = 1.0;
  std::optional<double> pnla;
  std::optional<long long> m;
  std::string rule = "any";

  void add_to(CLI::App& app) {
    app.add_option("--config", config, "JSON topology file (overrides --scenario)");
    app.add_option("--scenario", scenario, "canonical layout")->check(CLI::IsMember({"a", "b", "c", "A", "B", "C"}));
    app.add_option("--p", p, "link heralding probability");
    app.add_option("--q", q, "swap success probability");
    app.add_option("--pnla", pnla, "per-channel NLA success probability (p = 1-(1-pnla)^m)");
    app.add_option("--m", m, "multiplexed channels per link (default round(1/pnla))");
    app.add_option("--rule", rule, "service rule")->check(CLI::IsMember({"any", "parity"}));
  }

  ServiceRule service_rule() const { return rule == "parity" ? ServiceRule::opposite_parity : ServiceRule::any_orientation; }

  SwitchTopology topology() const {
    try {
      if (!config.empty()) return load_topology(config);
      if (p && pnla) throw ConfigError("give either --p or --pnla, not both");
      LinkParam link;
      if (pnla) {
        link = LinkParam::derived(*pnla, m ? *m : saturation_channels(*pnla));
      } else {
        link = LinkParam::direct(p.value_or(kDefaultLinkP));
      }
      return build_scenario(parse_scenario_tag(scenario), link, q).topology;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }
};

inline std::vector<double> parse_rates(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw UsageError("--lam: cannot parse '" + cell + "' as a number");
    }
  }
  return out;
}

/// Writes to `path`, or to `fallback` when path is empty or "-".
template <typename Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  fn(f);
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Max-Weight entanglement switch: analytic regions and stability simulation", "qswitch"};
  app.require_subcommand(1, 1);

  // region
  TopologyFlags region_topo;
  std::string region_format = "json";
  std::string region_out;
  double region_sample_step = 0.02;
  auto* region_cmd = app.add_subcommand("region", "analytic stable-rate region");
  region_topo.add_to(*region_cmd);
  region_cmd->add_option("--format", region_format, "output format")->check(CLI::IsMember({"json", "csv", "samples"}));
  region_cmd->add_option("--out", region_out, "output file ('-' for stdout)");
  region_cmd->add_option("--dlam", region_sample_step, "grid step for --format samples");

  // simulate
  TopologyFlags sim_topo;
  std::string sim_lam;
  std::uint64_t sim_steps = 100000;
  std::uint64_t sim_seed = 1;
  double sim_threshold = kDefaultSlopeThreshold;
  std::string sim_basis = "total";
  std::string sim_arrivals = "bernoulli";
  std::string sim_tie = "lowest";
  std::string sim_out;
  std::string sim_summary;
  bool sim_wait = false;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate one rate vector and classify stability");
  sim_topo.add_to(*sim_cmd);
  sim_cmd->add_option("--lam", sim_lam, "comma-separated request rates, one per flow")->required();
  sim_cmd->add_option("--steps", sim_steps, "time steps")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim_seed, "random seed");
  sim_cmd->add_option("--threshold", sim_threshold, "stability slope threshold");
  sim_cmd->add_option("--basis", sim_basis, "regression series")->check(CLI::IsMember({"total", "per_flow"}));
  sim_cmd->add_option("--arrivals", sim_arrivals, "arrival process")->check(CLI::IsMember({"bernoulli", "poisson"}));
  sim_cmd->add_option("--tie", sim_tie, "Max-Weight tie breaking")->check(CLI::IsMember({"lowest", "random"}));
  sim_cmd->add_option("--out", sim_out, "trace CSV file");
  sim_cmd->add_option("--summary", sim_summary, "summary JSON file (also printed to stdout)");
  sim_cmd->add_flag("--waiting", sim_wait, "track FIFO waiting times");

  // sweep
  TopologyFlags sweep_topo;
  double sweep_dlam = kDefaultGridStep;
  double sweep_min = 0.0;
  double sweep_max = 1.0;
  std::uint64_t sweep_steps = kDefaultSweepSteps;
  std::uint64_t sweep_seed = 1;
  std::size_t sweep_reps = 1;
  unsigned sweep_threads = 0;
  double sweep_threshold = kDefaultSlopeThreshold;
  double sweep_budget = kDefaultStepBudget;
  bool sweep_reference = false;
  bool sweep_quiet = false;
  std::string sweep_out;
  std::string sweep_summary;
  auto* sweep_cmd = app.add_subcommand("sweep", "simulate a grid of rate vectors");
  sweep_topo.add_to(*sweep_cmd);
  sweep_cmd->add_option("--dlam", sweep_dlam, "grid step")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--lam-min", sweep_min, "grid minimum");
  sweep_cmd->add_option("--lam-max", sweep_max, "grid maximum");
  sweep_cmd->add_option("--steps", sweep_steps, "time steps per point")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seed", sweep_seed, "base seed");
  sweep_cmd->add_option("--reps", sweep_reps, "repetitions per grid point")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--threads", sweep_threads, "worker threads (0 = all cores)");
  sweep_cmd->add_option("--threshold", sweep_threshold, "stability slope threshold");
  sweep_cmd->add_option("--max-steps", sweep_budget, "refuse sweeps needing more simulated steps");
  sweep_cmd->add_flag("--reference-grid", sweep_reference, "use dlam 0.005 and 1e5 steps per point");
  sweep_cmd->add_flag("--quiet", sweep_quiet, "no progress output");
  sweep_cmd->add_option("--out", sweep_out, "sweep CSV file ('-' for stdout)");
  sweep_cmd->add_option("--summary", sweep_summary, "summary JSON file");

  // plot
  TopologyFlags plot_topo;
  std::string plot_input;
  std::string plot_out;
  std::string plot_title;
  auto* plot_cmd = app.add_subcommand("plot", "render a 3-flow sweep and its analytic region as SVG");
  plot_topo.add_to(*plot_cmd);
  plot_cmd->add_option("--input", plot_input, "sweep CSV (omit for the region alone)");
  plot_cmd->add_option("--out", plot_out, "SVG file")->required();
  plot_cmd->add_option("--title", plot_title, "figure title");

  // capacity
  double cap_eta = 0.0;
  auto* cap_cmd = app.add_subcommand("capacity", "direct-transmission capacity -log2(1-eta)");
  cap_cmd->add_option("--eta", cap_eta, "channel transmissivity in [0,1)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*region_cmd) {
      const auto topo = region_topo.topology();
      const auto region = analytic_region(topo, region_topo.service_rule());
      const auto binding = binding_facets(region);
      for (const auto& b : region.bounds) {
        bool bind = false;
        for (const auto& f : binding) bind = bind || f.subset == b.subset;
        out << "sum" << subset_label(b.subset) << " <= " << format_double(b.bound) << (bind ? "  (binding)" : "")
            << '\n';
      }
      if (!region_out.empty()) {
        with_output(region_out, out, [&](std::ostream& o) {
          if (region_format == "json") {
            o << region_json(region).dump(2) << '\n';
          } else if (region_format == "csv") {
            write_region_csv(o, region);
          } else {
            write_region_samples_csv(o, region, region_sample_step, topo.swap_probs());
          }
        });
      }
      return kOk;
    }

    if (*sim_cmd) {
      SimConfig cfg;
      cfg.topology = sim_topo.topology();
      cfg.rule = sim_topo.service_rule();
      cfg.arrivals.kind = sim_arrivals == "poisson" ? ArrivalKind::poisson : ArrivalKind::bernoulli;
      cfg.arrivals.rates = parse_rates(sim_lam);
      if (cfg.arrivals.rates.size() != cfg.topology.num_flows()) {
        throw UsageError("--lam has " + std::to_string(cfg.arrivals.rates.size()) + " entries but the topology has " +
                         std::to_string(cfg.topology.num_flows()) + " flows");
      }
      cfg.steps = sim_steps;
      cfg.seed = sim_seed;
      cfg.tie = sim_tie == "random" ? TieBreak::seeded_random : TieBreak::lowest_index;
      cfg.track_waiting = sim_wait;
      cfg.record_per_flow = true;
      const auto trace = run(cfg);
      const auto verdict =
          classify(trace, sim_threshold, sim_basis == "per_flow" ? SlopeBasis::per_flow_max : SlopeBasis::total);
      if (!sim_out.empty()) with_output(sim_out, out, [&](std::ostream& o) { write_trace_csv(o, trace); });
      const auto summary = simulation_summary_json(cfg, trace, verdict);
      if (!sim_summary.empty()) {
        with_output(sim_summary, out, [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
      }
      out << verdict_json(verdict).dump() << '\n';
      return kOk;
    }

    if (*sweep_cmd) {
      SweepSpec spec;
      spec.base.topology = sweep_topo.topology();
      spec.base.rule = sweep_topo.service_rule();
      spec.base.seed = sweep_seed;
      spec.base.steps = sweep_reference ? kReferenceSweepSteps : sweep_steps;
      spec.axes = uniform_axes(spec.base.topology.num_flows(), sweep_min, sweep_max,
                               sweep_reference ? kReferenceGridStep : sweep_dlam);
      spec.repetitions = sweep_reps;
      spec.threads = sweep_threads;
      spec.threshold = sweep_threshold;
      spec.step_budget = sweep_budget;
      spec.region = analytic_region(spec.base.topology, spec.base.rule);
      if (!sweep_quiet) {
        spec.progress = [&err](std::size_t done, std::size_t total) {
          if (done == total || done % 500 == 0) err << "\rsweep " << done << "/" << total << (done == total ? "\n" : "") << std::flush;
        };
      }
      const auto result = run_sweep(spec);
      with_output(sweep_out, out, [&](std::ostream& o) { write_sweep_csv(o, result); });
      const auto summary = sweep_summary_json(spec, result);
      if (!sweep_summary.empty()) {
        with_output(sweep_summary, out, [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
      }
      if (!sweep_out.empty() && sweep_out != "-") out << summary["agreement"].dump() << '\n';
      return kOk;
    }

    if (*plot_cmd) {
      const auto topo = plot_topo.topology();
      if (topo.num_flows() != 3) throw UsageError("plots need exactly three flows; use the CSV output instead");
      const auto region = analytic_region(topo, plot_topo.service_rule());
      std::vector<SweepPoint> points;
      if (!plot_input.empty()) {
        std::ifstream in(plot_input);
        if (!in) throw ConfigError("cannot open sweep CSV '" + plot_input + "'");
        std::size_t k = 0;
        try {
          points = read_sweep_csv(in, &k);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
        if (k != 3) throw UsageError("plots need exactly three flows; use the CSV output instead");
      }
      with_output(plot_out, out, [&](std::ostream& o) { write_region_svg(o, region, points, plot_title); });
      return kOk;
    }

    if (*cap_cmd) {
      out << format_double(direct_capacity(cap_eta)) << '\n';
      return kOk;
    }
  } catch (const ResourceCapError& e) {
    err << "error: " << e.what() << "; raise the cap with --max-steps\n";
    return kResource;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const EnumerationCapError& e) {
    err << "error: " << e.what() << '\n';
    return kResource;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace qswitch::cli
