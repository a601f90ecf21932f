#pragma once

// Output current of one AND unit (input transistor + RRAM weight).
//
// Both variants share the same LRS path; they differ only in how strongly an
// activated HRS device is suppressed. The compensated unit's subthreshold
// suppression is modelled as a divisor calibrated on the population R-ratio.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "rramcim/device.hpp"
#include "rramcim/errors.hpp"

namespace rramcim {

enum class CellVariant { Compensated, Baseline1T1R };

inline const char* to_string(CellVariant v) { return v == CellVariant::Compensated ? "compensated" : "baseline"; }

struct CellParams {
  double i_unit_ua = 4.0;
  double v_read = 0.024; // i_unit * r_lrs_nominal; folded into i_unit
  double r_lrs_nominal_ohm = 6000.0;
  double target_r_ratio_compensated = 51.9;
  double target_r_ratio_baseline = 51.9 / 5.0;
  double compensation_bias_current_ua = 4.0;
  double stuck_current_ua = 4.0;

  double target_r_ratio(CellVariant v) const {
    return v == CellVariant::Compensated ? target_r_ratio_compensated : target_r_ratio_baseline;
  }

  void validate() const {
    if (!(std::isfinite(i_unit_ua) && i_unit_ua > 0)) throw ConfigError("cell: i_unit must be > 0");
    if (!(std::isfinite(r_lrs_nominal_ohm) && r_lrs_nominal_ohm > 0)) {
      throw ConfigError("cell: r_lrs_nominal must be > 0");
    }
    if (!(target_r_ratio_baseline > 1.0 && target_r_ratio_compensated > target_r_ratio_baseline &&
          std::isfinite(target_r_ratio_compensated))) {
      throw ConfigError("cell: need target_r_ratio_compensated > target_r_ratio_baseline > 1");
    }
    if (!(std::isfinite(stuck_current_ua) && stuck_current_ua >= 0)) {
      throw ConfigError("cell: stuck_current must be >= 0");
    }
  }
};

/// Output current in microamps. A deactivated unit (input 0) outputs exactly
/// zero whatever its weight or fault state.
inline double unit_current(bool input_bit, const DeviceSample& device, const CellParams& p,
                           const ResistanceModel& model, CellVariant variant) {
  if (!input_bit) return 0.0;
  if (device.fault == DeviceFault::StuckFault) return p.stuck_current_ua;
  if (device.state == ResistanceState::LRS) {
    return p.i_unit_ua * (p.r_lrs_nominal_ohm / device.resistance_ohm);
  }
  return p.i_unit_ua * (model.hrs_mean_ohm / device.resistance_ohm) / p.target_r_ratio(variant);
}

/// Nominal leakage of an activated HRS unit (device at the HRS mean).
inline double nominal_leakage_ua(const CellParams& p, CellVariant variant) {
  return p.i_unit_ua / p.target_r_ratio(variant);
}

/// mean(I_LRS) / mean(I_HRS) over `trials` independent activated units of
/// each state.
template <class Urbg>
double effective_r_ratio(CellVariant variant, const CellParams& p, const ResistanceModel& model,
                         std::uint64_t trials, Urbg& rng) {
  if (trials < 10000) throw std::invalid_argument("effective_r_ratio: needs at least 1e4 trials");
  double sum_lrs = 0.0;
  double sum_hrs = 0.0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    sum_lrs += unit_current(true, sample_resistance(model, ResistanceState::LRS, rng), p, model, variant);
    sum_hrs += unit_current(true, sample_resistance(model, ResistanceState::HRS, rng), p, model, variant);
  }
  return sum_lrs / sum_hrs;
}

} // namespace rramcim
