#pragma once

// Stochastic RRAM resistance model: truncated Gaussians per state plus an
// independent per-device stuck-at fault.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rramcim/errors.hpp"

namespace rramcim {

enum class ResistanceState { LRS, HRS };
enum class DeviceFault { None, StuckFault };

inline const char* to_string(ResistanceState s) { return s == ResistanceState::LRS ? "LRS" : "HRS"; }

struct ResistanceModel {
  double lrs_mean_ohm = 6000.0;
  double lrs_sigma_ohm = 60.0;
  double lrs_floor_ohm = 5000.0;
  double hrs_mean_ohm = 70000.0;
  double hrs_sigma_ohm = 10000.0;
  double hrs_floor_ohm = 40000.0;
  double yield_fault_prob = 0.0;
  // Multiplicative per-read jitter (retention fluctuation). 0 disables it.
  double read_noise_rel = 0.0;

  double mean(ResistanceState s) const { return s == ResistanceState::LRS ? lrs_mean_ohm : hrs_mean_ohm; }
  double sigma(ResistanceState s) const { return s == ResistanceState::LRS ? lrs_sigma_ohm : hrs_sigma_ohm; }
  double floor(ResistanceState s) const { return s == ResistanceState::LRS ? lrs_floor_ohm : hrs_floor_ohm; }

  /// Throws ConfigError on the first violated invariant. Sigma 0 is accepted
  /// as the deterministic limit.
  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!(finite(lrs_mean_ohm) && finite(hrs_mean_ohm) && lrs_mean_ohm > 0 && hrs_mean_ohm > 0)) {
      throw ConfigError("device: resistance means must be finite and > 0");
    }
    if (!(finite(lrs_sigma_ohm) && finite(hrs_sigma_ohm) && lrs_sigma_ohm >= 0 && hrs_sigma_ohm >= 0)) {
      throw ConfigError("device: resistance sigmas must be finite and >= 0");
    }
    if (!(finite(lrs_floor_ohm) && lrs_floor_ohm >= 0 && lrs_floor_ohm <= lrs_mean_ohm)) {
      throw ConfigError("device: lrs_floor must lie in [0, lrs_mean]");
    }
    if (!(finite(hrs_floor_ohm) && hrs_floor_ohm > lrs_mean_ohm && hrs_floor_ohm <= hrs_mean_ohm)) {
      throw ConfigError("device: hrs_floor must lie in (lrs_mean, hrs_mean]");
    }
    if (!(yield_fault_prob >= 0.0 && yield_fault_prob <= 1.0)) {
      throw ConfigError("device: yield_fault_prob must lie in [0, 1]");
    }
    if (!(finite(read_noise_rel) && read_noise_rel >= 0.0 && read_noise_rel < 0.5)) {
      throw ConfigError("device: read_noise_rel must lie in [0, 0.5)");
    }
  }
};

struct DeviceSample {
  double resistance_ohm = 0.0;
  ResistanceState state = ResistanceState::HRS;
  DeviceFault fault = DeviceFault::None;
};

/// Truncated normal by rejection: redraw until the value clears the floor.
/// With the default parameters the HRS floor sits 3 sigma below the mean, which
/// shifts the sample mean up by about 0.4% of sigma (45 ohm).
template <class Urbg>
double sample_truncated_normal(double mean, double sigma, double floor, Urbg& rng) {
  if (sigma == 0.0) return mean;
  std::normal_distribution<double> normal(mean, sigma);
  for (;;) {
    const double r = normal(rng);
    if (r >= floor) return r;
  }
}

template <class Urbg>
DeviceSample sample_resistance(const ResistanceModel& model, ResistanceState state, Urbg& rng) {
  return DeviceSample{sample_truncated_normal(model.mean(state), model.sigma(state), model.floor(state), rng),
                      state, DeviceFault::None};
}

template <class Urbg>
DeviceFault sample_fault(const ResistanceModel& model, Urbg& rng) {
  if (model.yield_fault_prob <= 0.0) return DeviceFault::None;
  if (model.yield_fault_prob >= 1.0) return DeviceFault::StuckFault;
  std::bernoulli_distribution fault(model.yield_fault_prob);
  return fault(rng) ? DeviceFault::StuckFault : DeviceFault::None;
}

/// Programs one device: resistance draw for the state, then its fault flag.
template <class Urbg>
DeviceSample program_device(const ResistanceModel& model, ResistanceState state, Urbg& rng) {
  DeviceSample d = sample_resistance(model, state, rng);
  d.fault = sample_fault(model, rng);
  return d;
}

/// Resistance seen by one read, including optional retention jitter.
template <class Urbg>
DeviceSample read_device(const DeviceSample& programmed, const ResistanceModel& model, Urbg& rng) {
  if (model.read_noise_rel == 0.0) return programmed;
  std::normal_distribution<double> jitter(0.0, model.read_noise_rel);
  DeviceSample d = programmed;
  d.resistance_ohm = std::max(programmed.resistance_ohm * (1.0 + jitter(rng)), model.floor(programmed.state));
  return d;
}

} // namespace rramcim
