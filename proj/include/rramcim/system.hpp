#pragma once

// Full BMVM pipeline: tile A over sub-arrays, read every row through its
// PCSPC, merge the per-sub-array parities with an XOR tree. Also the Monte
// Carlo bit-error-rate estimator and the comparator-noise calibration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rramcim/array.hpp"
#include "rramcim/bitlinalg.hpp"
#include "rramcim/cell.hpp"
#include "rramcim/device.hpp"
#include "rramcim/errors.hpp"
#include "rramcim/pcspc.hpp"
#include "rramcim/rng.hpp"

namespace rramcim {

struct SystemConfig {
  std::size_t subarray_count = 4;
  SubArrayConfig subarray;
  ResistanceModel device;
  CellParams cell;
  CellVariant variant = CellVariant::Compensated;
  PcspcParams pcspc = calibrate_params(4.0, 40e6, 0.8);
  std::uint64_t master_seed = 1;
  double weight_density = 0.5;
  double input_density = 0.5;

  std::size_t input_width() const { return subarray_count * subarray.compute_cols; }

  void validate() const {
    if (subarray_count == 0) throw ConfigError("system: subarray_count must be > 0");
    subarray.validate();
    device.validate();
    cell.validate();
    try {
      pcspc.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (!(weight_density >= 0 && weight_density <= 1 && input_density >= 0 && input_density <= 1)) {
      throw ConfigError("system: densities must lie in [0, 1]");
    }
  }
};

/// The deterministic limit: every resistance equals its state mean.
inline SystemConfig with_ideal_devices(SystemConfig cfg) {
  cfg.device.lrs_sigma_ohm = 0.0;
  cfg.device.hrs_sigma_ohm = 0.0;
  cfg.device.read_noise_rel = 0.0;
  return cfg;
}

struct ColumnLocation {
  std::size_t subarray;
  std::size_t local_column;
};

/// Global column j lives in slice j / compute_cols.
inline ColumnLocation locate_column(std::size_t j, const SystemConfig& cfg) {
  return {j / cfg.subarray.compute_cols, j % cfg.subarray.compute_cols};
}

template <class Urbg>
std::vector<DeployedSubArray> map_task(const BitMatrix& a, const SystemConfig& cfg, Urbg& rng) {
  if (a.cols() != cfg.input_width()) {
    throw DimensionError("map_task: matrix has " + std::to_string(a.cols()) + " columns, " +
                         std::to_string(cfg.subarray_count) + " sub-arrays take " +
                         std::to_string(cfg.input_width()));
  }
  if (a.rows() > cfg.subarray.rows) {
    throw DimensionError("map_task: matrix has " + std::to_string(a.rows()) + " rows, sub-arrays hold " +
                         std::to_string(cfg.subarray.rows));
  }
  std::vector<DeployedSubArray> subs;
  subs.reserve(cfg.subarray_count);
  for (std::size_t s = 0; s < cfg.subarray_count; ++s) {
    subs.push_back(
        deploy(a.column_slice(s * cfg.subarray.compute_cols, cfg.subarray.compute_cols), cfg.device, cfg.subarray, rng));
  }
  return subs;
}

/// Pairwise XOR reduction of the per-sub-array parity bits.
inline bool xor_tree(std::span<const std::uint8_t> bits) {
  std::vector<std::uint8_t> level(bits.begin(), bits.end());
  if (level.empty()) return false;
  while (level.size() > 1) {
    std::vector<std::uint8_t> next((level.size() + 1) / 2);
    for (std::size_t i = 0; i < next.size(); ++i) {
      const std::uint8_t left = level[2 * i] & 1u;
      const std::uint8_t right = 2 * i + 1 < level.size() ? (level[2 * i + 1] & 1u) : 0u;
      next[i] = left ^ right;
    }
    level = std::move(next);
  }
  return level[0] & 1u;
}

struct RowReadout {
  double current_ua = 0.0;
  PcspcTrace trace; // waveform only for the traced row
};

struct RunOptions {
  bool record_diagnostics = false;
  bool stepped_readout = false;
  std::optional<std::size_t> trace_row; // waveform capture for this row
};

struct BmvmRun {
  BitVector y;
  // Indexed [row][subarray] when record_diagnostics is set.
  std::vector<std::vector<RowReadout>> diagnostics;
};

/// Evaluates y = A x on already deployed sub-arrays. Comparator noise and
/// read jitter are drawn from rng row by row, sub-array by sub-array.
template <class Urbg>
BmvmRun compute_bmvm(std::span<const DeployedSubArray> subs, const BitVector& x, const SystemConfig& cfg, Urbg& rng,
                     const RunOptions& opt = {}) {
  if (subs.size() != cfg.subarray_count) throw DimensionError("compute_bmvm: wrong number of sub-arrays");
  if (x.size() != cfg.input_width()) {
    throw DimensionError("compute_bmvm: input has " + std::to_string(x.size()) + " bits, expected " +
                         std::to_string(cfg.input_width()));
  }
  const std::size_t rows = subs.front().used_rows();
  std::vector<BitVector> slices;
  for (std::size_t s = 0; s < subs.size(); ++s) {
    slices.push_back(x.slice(s * cfg.subarray.compute_cols, cfg.subarray.compute_cols));
  }

  BmvmRun run;
  run.y = BitVector(rows);
  if (opt.record_diagnostics) run.diagnostics.assign(rows, std::vector<RowReadout>(subs.size()));

  std::normal_distribution<double> unit_normal(0.0, 1.0);
  std::vector<std::uint8_t> partial(subs.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t s = 0; s < subs.size(); ++s) {
      const double i_mc = row_current(subs[s], r, slices[s], cfg.cell, cfg.device, cfg.variant, rng);
      const bool traced = opt.trace_row && *opt.trace_row == r;
      PcspcTrace t;
      if (opt.stepped_readout || traced) {
        t = simulate_readout(i_mc, cfg.pcspc, rng, ReadoutOptions{traced});
      } else {
        double noise = 0.0;
        if (cfg.pcspc.comparator_noise_sigma_v > 0) noise = cfg.pcspc.comparator_noise_sigma_v * unit_normal(rng);
        t = readout_closed_form(i_mc, cfg.pcspc, noise);
      }
      partial[s] = t.xor_out ? 1 : 0;
      if (opt.record_diagnostics) run.diagnostics[r][s] = RowReadout{i_mc, std::move(t)};
    }
    if (xor_tree(partial)) run.y.set(r, true);
  }
  return run;
}

/// Deploys A (device and fault sampling from rng), then evaluates A x.
template <class Urbg>
BmvmRun run_bmvm(const BitMatrix& a, const BitVector& x, const SystemConfig& cfg, Urbg& rng,
                 const RunOptions& opt = {}) {
  cfg.validate();
  const auto subs = map_task(a, cfg, rng);
  return compute_bmvm(std::span<const DeployedSubArray>(subs), x, cfg, rng, opt);
}

// ---------------------------------------------------------------------------
// Bit error rate

struct BerEstimate {
  std::uint64_t errors = 0;
  std::uint64_t trials = 0;
  double ber = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  // Fewer than 10 errors: treat ci_high as an upper bound, not a point value.
  bool upper_bound_only = false;
};

/// Wilson score interval at 95%.
inline BerEstimate make_ber_estimate(std::uint64_t errors, std::uint64_t trials) {
  BerEstimate e;
  e.errors = errors;
  e.trials = trials;
  if (trials == 0) return e;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / n;
  const double z = 1.959963984540054;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  e.ber = p;
  e.ci_low = errors == 0 ? 0.0 : std::max(0.0, centre - half);
  e.ci_high = std::min(1.0, centre + half);
  e.upper_bound_only = errors < 10;
  return e;
}

namespace detail {

// One PCSPC row evaluation on a sub-array with `compute_bits` compute columns
// plus the constant-bias unit. Returns the noise-free sample voltage and the
// exact XOR bit; the caller applies comparator noise.
struct RowSample {
  double v_sample;
  bool parity;
};

template <class Urbg>
RowSample sample_row(const SystemConfig& cfg, unsigned compute_bits, Urbg& rng) {
  std::bernoulli_distribution weight_bit(cfg.weight_density);
  std::bernoulli_distribution input_bit(cfg.input_density);
  double current = 0.0;
  bool parity = false;
  for (unsigned j = 0; j < compute_bits; ++j) {
    const bool w = weight_bit(rng);
    const bool x = input_bit(rng);
    if (!x) continue;
    parity ^= w;
    const DeviceSample d = program_device(cfg.device, w ? ResistanceState::LRS : ResistanceState::HRS, rng);
    current += unit_current(true, read_device(d, cfg.device, rng), cfg.cell, cfg.device, cfg.variant);
  }
  const DeviceSample bias = program_device(cfg.device, ResistanceState::LRS, rng);
  current += unit_current(true, read_device(bias, cfg.device, rng), cfg.cell, cfg.device, cfg.variant);
  return {readout_closed_form(current, cfg.pcspc).v_charge_at_sample, parity};
}

inline std::uint64_t ber_stream_index(unsigned compute_bits, std::uint64_t block) {
  return (static_cast<std::uint64_t>(compute_bits) << 40) | block;
}

} // namespace detail

struct BerOptions {
  unsigned jobs = 0;
  std::uint64_t block_size = kDefaultBlockSize;
};

/// Monte Carlo BER of one sub-array row readout with `compute_bits` compute
/// columns: random weights, inputs, device draws and comparator noise per
/// trial. A trial errs when the decoded XOR bit differs from the exact parity.
/// The comparator noise variate is drawn even when sigma is 0, so runs that
/// differ only in sigma share every other random number.
inline BerEstimate estimate_ber(const SystemConfig& cfg, unsigned compute_bits, std::uint64_t trials,
                                const BerOptions& opt = {}) {
  cfg.validate();
  if (compute_bits == 0) throw std::invalid_argument("estimate_ber: compute_bits must be > 0");
  const double sigma = cfg.pcspc.comparator_noise_sigma_v;
  const auto partials = run_blocks<std::uint64_t>(
      trials, opt.block_size, opt.jobs, [&](std::uint64_t block, std::uint64_t begin, std::uint64_t end) {
        Rng rng = make_stream(cfg.master_seed, StreamDomain::Ber, detail::ber_stream_index(compute_bits, block));
        std::normal_distribution<double> unit_normal(0.0, 1.0);
        std::uint64_t errors = 0;
        for (std::uint64_t t = begin; t < end; ++t) {
          const auto row = detail::sample_row(cfg, compute_bits, rng);
          const double noise = sigma * unit_normal(rng);
          const bool xor_out = !((row.v_sample + noise) > cfg.pcspc.v_ref);
          if (xor_out != row.parity) ++errors;
        }
        return errors;
      });
  std::uint64_t errors = 0;
  for (auto e : partials) errors += e;
  return make_ber_estimate(errors, trials);
}

struct NoiseCalibration {
  double sigma_v = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t device_errors = 0; // wrong even without comparator noise
  double target_ber = 0.0;
};

/// Finds the comparator noise sigma at which the expected BER at
/// `compute_bits` equals target_ber.
///
/// For each trial with a correct noise-free decision, the noise variate z
/// flips the decision exactly when sigma >= sigma* = distance_to_vref / |z|
/// (z pointing across V_ref). The error count is therefore a step function of
/// sigma and the fitted sigma is an order statistic of sigma*. Trials already
/// wrong without noise are counted as errors at every sigma.
inline NoiseCalibration calibrate_comparator_noise(const SystemConfig& cfg, unsigned compute_bits, double target_ber,
                                                   std::uint64_t trials, const BerOptions& opt = {}) {
  cfg.validate();
  if (!(target_ber > 0 && target_ber < 0.5)) throw std::invalid_argument("calibrate: target_ber must lie in (0, 0.5)");
  const auto wanted = static_cast<std::uint64_t>(std::llround(target_ber * static_cast<double>(trials)));
  if (wanted == 0) throw std::invalid_argument("calibrate: too few trials for the target BER");

  struct Partial {
    std::uint64_t device_errors = 0;
    std::vector<double> smallest; // sorted, at most `wanted`
  };
  const auto partials = run_blocks<Partial>(
      trials, opt.block_size, opt.jobs, [&](std::uint64_t block, std::uint64_t begin, std::uint64_t end) {
        Rng rng = make_stream(cfg.master_seed, StreamDomain::Calibration, detail::ber_stream_index(compute_bits, block));
        std::normal_distribution<double> unit_normal(0.0, 1.0);
        Partial part;
        std::vector<double> critical;
        for (std::uint64_t t = begin; t < end; ++t) {
          const auto row = detail::sample_row(cfg, compute_bits, rng);
          const double z = unit_normal(rng);
          const bool want_comparator = !row.parity;
          const double distance = row.v_sample - cfg.pcspc.v_ref; // > 0 decides comparator 1
          if ((distance > 0) != want_comparator) {
            ++part.device_errors;
            continue;
          }
          if (want_comparator && z < 0) critical.push_back(distance / -z);
          if (!want_comparator && z > 0) critical.push_back(-distance / z);
        }
        const std::size_t keep = std::min<std::size_t>(critical.size(), wanted);
        std::partial_sort(critical.begin(), critical.begin() + static_cast<std::ptrdiff_t>(keep), critical.end());
        critical.resize(keep);
        part.smallest = std::move(critical);
        return part;
      });

  NoiseCalibration out;
  out.trials = trials;
  out.target_ber = target_ber;
  std::vector<double> all;
  for (const auto& p : partials) {
    out.device_errors += p.device_errors;
    all.insert(all.end(), p.smallest.begin(), p.smallest.end());
  }
  if (out.device_errors >= wanted) return out; // already at or above target without noise
  const std::size_t need = wanted - out.device_errors;
  if (all.size() < need) throw std::runtime_error("calibrate: target BER unreachable");
  std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(need - 1), all.end());
  out.sigma_v = all[need - 1];
  return out;
}

// ---------------------------------------------------------------------------
// Single-row exhaustive decode

struct ExhaustiveRowResult {
  std::uint64_t inputs = 0;
  std::uint64_t matches = 0;
  bool all_match() const { return inputs == matches; }
};

/// Deploys one row holding `weights` on a single sub-array and decodes all
/// 2^compute_cols inputs through the stepped PCSPC simulation.
template <class Urbg>
ExhaustiveRowResult exhaustive_row_check(const BitVector& weights, const SystemConfig& cfg, Urbg& rng) {
  cfg.validate();
  const std::size_t n = cfg.subarray.compute_cols;
  if (weights.size() != n) throw DimensionError("exhaustive_row_check: weight row width mismatch");
  if (n > 20) throw std::invalid_argument("exhaustive_row_check: too many columns to enumerate");
  BitMatrix row(1, n);
  row.set_row(0, weights);
  SubArrayConfig one_row = cfg.subarray;
  one_row.rows = 1;
  const DeployedSubArray sub = deploy(row, cfg.device, one_row, rng);

  ExhaustiveRowResult result;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
    BitVector x(n);
    for (std::size_t j = 0; j < n; ++j) x.set(j, (code >> j) & 1u);
    const double i_mc = row_current(sub, 0, x, cfg.cell, cfg.device, cfg.variant, rng);
    const bool decoded = simulate_readout(i_mc, cfg.pcspc, rng).xor_out;
    ++result.inputs;
    if (decoded == parity(weights & x)) ++result.matches;
  }
  return result;
}

} // namespace rramcim
