#pragma once

// Closed-form link-level quantities.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qswitch {

/// Repeaterless entanglement distribution capacity of a pure-loss channel,
/// in ebits per mode.
inline double direct_capacity(double eta) {
  if (!(eta >= 0.0 && eta < 1.0)) {
    throw std::domain_error("transmissivity must lie in [0,1), got " + std::to_string(eta));
  }
  return -std::log2(1.0 - eta);
}

/// Probability that at least one of `m` multiplexed channels heralds, each
/// succeeding independently with `pnla`.
inline double herald_prob(double pnla, long long m) {
  if (!(pnla > 0.0 && pnla <= 1.0)) {
    throw std::domain_error("pnla must lie in (0,1], got " + std::to_string(pnla));
  }
  if (m < 1) {
    throw std::domain_error("channel count m must be >= 1, got " + std::to_string(m));
  }
  if (pnla == 1.0) {
    return 1.0;
  }
  // 1 - (1-pnla)^m without cancellation for small pnla
  return -std::expm1(static_cast<double>(m) * std::log1p(-pnla));
}

/// Channel count used when multiplexing scales as the inverse NLA success
/// probability: round(1/pnla), never below one.
inline long long saturation_channels(double pnla) {
  if (!(pnla > 0.0 && pnla <= 1.0)) {
    throw std::domain_error("pnla must lie in (0,1], got " + std::to_string(pnla));
  }
  return std::max<long long>(1, std::llround(1.0 / pnla));
}

/// herald_prob with m = round(1/pnla). Decreases toward 1 - 1/e as pnla -> 0.
inline double saturation_prob(double pnla) { return herald_prob(pnla, saturation_channels(pnla)); }

/// Optional parametric model P_NLA = c * eta^(1/4), clamped to (0,1].
inline double pnla_from_transmissivity(double eta, double c = 1.0) {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw std::domain_error("transmissivity must lie in (0,1), got " + std::to_string(eta));
  }
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw std::domain_error("pnla prefactor must be positive and finite");
  }
  return std::min(1.0, c * std::pow(eta, 0.25));
}

}  // namespace qswitch
