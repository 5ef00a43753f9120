#pragma once

// Per-step stochastic link generation.
//
// Randomness is counter based: every draw is a pure function of
// (seed, stream, step, draw index), so a run can be replayed or split across
// threads without carrying generator state around.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qswitch/link_formulas.hpp"
#include "qswitch/model.hpp"

namespace qswitch {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Order-sensitive fold of 64-bit words into one seed.
constexpr std::uint64_t combine_seed(std::uint64_t acc, std::uint64_t word) {
  return mix64(acc ^ mix64(word));
}

/// Which consumer a stream belongs to. Streams of different kinds never
/// alias, so e.g. toggling the service rule cannot shift the arrival trace.
enum class StreamKind : std::uint32_t { link = 1, arrival = 2, swap = 3, tie_break = 4 };

class RngStream {
 public:
  constexpr RngStream(std::uint64_t seed, StreamKind kind, std::uint32_t index)
      : seed_(seed), key_(combine_seed(mix64(seed), (std::uint64_t(kind) << 32) | index)) {}

  constexpr std::uint64_t bits(std::uint64_t step, std::uint32_t draw) const {
    return combine_seed(combine_seed(key_, step), draw);
  }

  /// Uniform on [0,1) with 53 random bits.
  constexpr double uniform(std::uint64_t step, std::uint32_t draw) const {
    return static_cast<double>(bits(step, draw) >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
};

/// One stream per link, all derived from a single seed.
class LinkRng {
 public:
  LinkRng(std::uint64_t seed, std::size_t num_links) {
    streams_.reserve(num_links);
    for (std::size_t j = 0; j < num_links; ++j) {
      streams_.emplace_back(seed, StreamKind::link, static_cast<std::uint32_t>(j));
    }
  }

  const RngStream& operator[](std::size_t j) const { return streams_[j]; }
  std::size_t size() const { return streams_.size(); }

 private:
  std::vector<RngStream> streams_;
};

/// Link outcomes for one time step. `up[j]` is the success indicator and
/// `orient[j]` the orientation bit (1 = scissor end at the switch), which is
/// kept at 0 whenever the link is down.
struct LinkSnapshot {
  std::vector<std::uint8_t> up;
  std::vector<std::uint8_t> orient;
  std::uint64_t step = 0;

  static LinkSnapshot all_up(std::size_t num_links, std::uint64_t step = 0) {
    return LinkSnapshot{std::vector<std::uint8_t>(num_links, 1),
                        std::vector<std::uint8_t>(num_links, 0), step};
  }

  static LinkSnapshot from(std::vector<std::uint8_t> up, std::vector<std::uint8_t> orient = {},
                           std::uint64_t step = 0) {
    if (orient.empty()) orient.assign(up.size(), 0);
    for (std::size_t j = 0; j < up.size(); ++j) {
      if (!up[j]) orient[j] = 0;
    }
    return LinkSnapshot{std::move(up), std::move(orient), step};
  }

  bool operator==(const LinkSnapshot&) const = default;
};

/// Each link succeeds independently with its p; the orientation of a success
/// is a fair coin. Exactly two uniforms are consumed per link per step
/// (draw 0: success, draw 1: orientation), whether or not the link succeeds.
inline void sample_links_into(const SwitchTopology& topo, const LinkRng& rng, std::uint64_t step,
                              LinkSnapshot& out) {
  const std::size_t n = topo.links.size();
  out.up.resize(n);
  out.orient.resize(n);
  out.step = step;
  for (std::size_t j = 0; j < n; ++j) {
    const double u_up = rng[j].uniform(step, 0);
    const double u_or = rng[j].uniform(step, 1);
    const bool up = u_up < topo.links[j].p;
    out.up[j] = up ? 1 : 0;
    out.orient[j] = (up && u_or < 0.5) ? 1 : 0;
  }
}

inline LinkSnapshot sample_links(const SwitchTopology& topo, const LinkRng& rng, std::uint64_t step) {
  LinkSnapshot snap;
  sample_links_into(topo, rng, step, snap);
  return snap;
}

}  // namespace qswitch
