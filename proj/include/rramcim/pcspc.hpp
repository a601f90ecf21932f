#pragma once

// Pulsed current-sensing parity checker (PCSPC).
//
// The row current charges C1 during the GRC-low window. Each time V_charge
// reaches V_TH the local reset discharges it, emitting one ramp pulse. C1 is
// sized so that two unit currents make one ramp, hence the residual voltage at
// the comparator instant is ~V_TH/2 for odd Hamming weight and ~0 for even.
// Because the constant-bias column adds one unit, the comparator output is
// inverted to form the XOR bit.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rramcim/errors.hpp"

namespace rramcim {

struct PcspcParams {
  double c1_farad = 0.0;
  double v_th = 0.8;
  double v_ref = 0.2;
  double grc_period_s = 25e-9;
  double t_d_s = 1e-9;
  double comparator_noise_sigma_v = 0.0;
  double time_step_s = 25e-12;

  /// Comparator instant, measured from the start of the GRC-low window.
  double sample_time_s() const { return grc_period_s - t_d_s; }

  void validate() const {
    for (double v : {c1_farad, v_th, v_ref, grc_period_s, t_d_s, comparator_noise_sigma_v, time_step_s}) {
      if (!std::isfinite(v)) throw std::invalid_argument("pcspc: non-finite parameter");
    }
    if (!(c1_farad > 0 && v_th > 0 && grc_period_s > 0 && time_step_s > 0)) {
      throw std::invalid_argument("pcspc: c1, v_th, grc_period and time_step must be > 0");
    }
    if (!(v_ref > 0 && v_ref < v_th / 2)) throw std::invalid_argument("pcspc: need 0 < v_ref < v_th/2");
    if (!(t_d_s >= 0 && t_d_s < grc_period_s)) throw std::invalid_argument("pcspc: need 0 <= t_d < grc_period");
    if (comparator_noise_sigma_v < 0) throw std::invalid_argument("pcspc: comparator noise sigma must be >= 0");
    if (time_step_s > grc_period_s) throw std::invalid_argument("pcspc: time_step exceeds grc_period");
  }
};

/// Design inputs beyond (i_unit, frequency, V_TH) for calibrate_params.
struct PcspcDesign {
  double t_d_s = 1e-9;
  // Fractional excess charge per unit current at the comparator instant over
  // the exact half-ramp. Even weights then end slightly above 0 V instead of
  // on the V_TH knife edge. Bounded by weight * margin / 2 < 1/4 (even-case
  // residual below V_ref) up to weight 10; 0.035 centres that band for a
  // 1% LRS current spread.
  double charge_margin = 0.035;
  double comparator_noise_sigma_v = 0.0;
  double steps_per_period = 1000.0;
};

/// Sizes C1 so that 2 * i_unit * t_sample / C1 == V_TH * (1 + margin) and
/// sets V_ref = V_TH / 4, midway between 0 and V_TH / 2.
inline PcspcParams calibrate_params(double i_unit_ua, double grc_frequency_hz, double v_th,
                                    const PcspcDesign& design = {}) {
  if (!(i_unit_ua > 0 && grc_frequency_hz > 0 && v_th > 0 && std::isfinite(i_unit_ua) &&
        std::isfinite(grc_frequency_hz) && std::isfinite(v_th))) {
    throw std::invalid_argument("calibrate_params: inputs must be finite and > 0");
  }
  if (!(design.charge_margin >= 0 && design.charge_margin < 0.1)) {
    throw std::invalid_argument("calibrate_params: charge_margin must lie in [0, 0.1)");
  }
  PcspcParams p;
  p.grc_period_s = 1.0 / grc_frequency_hz;
  p.t_d_s = design.t_d_s;
  p.v_th = v_th;
  p.v_ref = v_th / 4.0;
  p.comparator_noise_sigma_v = design.comparator_noise_sigma_v;
  p.time_step_s = p.grc_period_s / design.steps_per_period;
  p.c1_farad = 2.0 * (i_unit_ua * 1e-6) * p.sample_time_s() / (v_th * (1.0 + design.charge_margin));
  p.validate();
  return p;
}

/// Voltage that a pair of unit currents deposits on C1 by the comparator
/// instant. Equals V_TH * (1 + margin) for calibrated parameters.
inline double pair_charge_voltage(double i_unit_ua, const PcspcParams& p) {
  return 2.0 * (i_unit_ua * 1e-6) * p.sample_time_s() / p.c1_farad;
}

/// Bits of a conventional ADC resolving the same number of levels.
inline double effective_resolution(unsigned levels) {
  if (levels < 2) throw std::invalid_argument("effective_resolution: needs at least 2 levels");
  return std::log2(static_cast<double>(levels));
}

enum class TraceEvent { Charge, LocalReset, Sample, GlobalReset };

inline const char* to_string(TraceEvent e) {
  switch (e) {
    case TraceEvent::Charge: return "charge";
    case TraceEvent::LocalReset: return "local_reset";
    case TraceEvent::Sample: return "sample";
    case TraceEvent::GlobalReset: return "global_reset";
  }
  return "?";
}

struct TracePoint {
  double time_s;
  double v_charge;
  TraceEvent event;
};

struct PcspcTrace {
  unsigned ramp_pulse_count = 0;
  double v_charge_at_sample = 0.0;
  bool comparator_bit = false;
  bool xor_out = true;
  std::vector<TracePoint> waveform; // filled only when requested
};

struct ReadoutOptions {
  bool record_waveform = false;
};

namespace detail {

// Threshold-judge tolerance relative to V_TH; absorbs rounding at exact
// multiples of the ramp height.
inline constexpr double kJudgeTolerance = 1e-9;

inline PcspcTrace finish(PcspcTrace t, double v, double noise_v, const PcspcParams& p) {
  t.v_charge_at_sample = v;
  t.comparator_bit = (v + noise_v) > p.v_ref;
  t.xor_out = !t.comparator_bit;
  return t;
}

inline PcspcTrace integrate(double i_mc_ua, const PcspcParams& p, double noise_v, const ReadoutOptions& opt) {
  p.validate();
  if (!(std::isfinite(i_mc_ua) && i_mc_ua >= 0)) throw std::invalid_argument("simulate_readout: need i_mc >= 0");

  const double slope = (i_mc_ua * 1e-6) / p.c1_farad; // V/s
  const double threshold = p.v_th * (1.0 - kJudgeTolerance);
  const double t_sample = p.sample_time_s();
  const auto full_steps = static_cast<std::uint64_t>(std::floor(t_sample / p.time_step_s));

  PcspcTrace trace;
  auto record = [&](double t, double v, TraceEvent e) {
    if (opt.record_waveform) trace.waveform.push_back({t, v, e});
  };

  double v = 0.0;
  double t = 0.0;
  unsigned pulses_at_sample = 0;
  double v_at_sample = 0.0;
  record(0.0, 0.0, TraceEvent::Charge);

  // Forward steps with in-step crossing detection. The current is constant
  // over the window, so the crossing instant inside a step is exact.
  auto advance = [&](double dt) {
    double v_next = v + slope * dt;
    double v_start = v;
    while (v_next >= threshold) {
      const double t_cross = t + (p.v_th - v_start) / slope;
      record(t_cross, p.v_th, TraceEvent::LocalReset);
      record(t_cross, 0.0, TraceEvent::LocalReset);
      ++trace.ramp_pulse_count;
      v_next = std::max(0.0, v_next - p.v_th);
      t = t_cross;
      v_start = 0.0;
    }
    v = v_next;
  };

  for (std::uint64_t k = 1; k <= full_steps; ++k) {
    const double t_next = static_cast<double>(k) * p.time_step_s;
    advance(t_next - t);
    t = t_next;
    record(t, v, TraceEvent::Charge);
  }
  if (t_sample > t) {
    advance(t_sample - t);
    t = t_sample;
  }
  pulses_at_sample = trace.ramp_pulse_count;
  v_at_sample = v;
  record(t, v, TraceEvent::Sample);

  if (opt.record_waveform) {
    // Finish the window for the dump only; the result is taken at the sample.
    const auto total_steps = static_cast<std::uint64_t>(std::floor(p.grc_period_s / p.time_step_s));
    for (std::uint64_t k = full_steps + 1; k <= total_steps; ++k) {
      const double t_next = static_cast<double>(k) * p.time_step_s;
      if (t_next <= t) continue;
      advance(t_next - t);
      t = t_next;
      record(t, v, TraceEvent::Charge);
    }
    if (p.grc_period_s > t) {
      advance(p.grc_period_s - t);
      t = p.grc_period_s;
    }
    record(t, v, TraceEvent::GlobalReset);
    record(t, 0.0, TraceEvent::GlobalReset);
  }

  trace.ramp_pulse_count = pulses_at_sample;
  return finish(std::move(trace), v_at_sample, noise_v, p);
}

} // namespace detail

/// Stepped simulation of one GRC window, noise-free comparator.
inline PcspcTrace simulate_readout(double i_mc_ua, const PcspcParams& p, const ReadoutOptions& opt = {}) {
  return detail::integrate(i_mc_ua, p, 0.0, opt);
}

/// Stepped simulation with comparator noise N(0, sigma^2) drawn from rng.
template <std::uniform_random_bit_generator Urbg>
PcspcTrace simulate_readout(double i_mc_ua, const PcspcParams& p, Urbg& rng, const ReadoutOptions& opt = {}) {
  double noise = 0.0;
  if (p.comparator_noise_sigma_v > 0) noise = std::normal_distribution<double>(0.0, p.comparator_noise_sigma_v)(rng);
  return detail::integrate(i_mc_ua, p, noise, opt);
}

/// Closed-form equivalent of simulate_readout for constant current:
/// pulses = floor(q / V_TH), residual = q - pulses * V_TH, q = I * t_s / C1.
/// `noise_v` is the comparator noise already scaled to volts.
inline PcspcTrace readout_closed_form(double i_mc_ua, const PcspcParams& p, double noise_v = 0.0) {
  const double q = (i_mc_ua * 1e-6) * p.sample_time_s() / p.c1_farad;
  double pulses = std::floor(q / p.v_th + detail::kJudgeTolerance);
  if (pulses < 0) pulses = 0;
  PcspcTrace t;
  t.ramp_pulse_count = static_cast<unsigned>(pulses);
  return detail::finish(std::move(t), std::max(0.0, q - pulses * p.v_th), noise_v, p);
}

} // namespace rramcim
