#pragma once

// One RRAM sub-array: rows x (compute + redundant) AND units. The last
// redundant column is the constant-bias column (always activated, LRS); the
// other redundant columns are spares that the input driver keeps inactive.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rramcim/bitlinalg.hpp"
#include "rramcim/cell.hpp"
#include "rramcim/device.hpp"
#include "rramcim/errors.hpp"
#include "rramcim/rng.hpp"

namespace rramcim {

struct SubArrayConfig {
  std::size_t rows = 512;
  std::size_t compute_cols = 9;
  std::size_t redundant_cols = 3;

  std::size_t total_cols() const { return compute_cols + redundant_cols; }
  std::size_t bias_col() const { return total_cols() - 1; }
  std::size_t spare_slots() const { return redundant_cols - 1; }

  void validate() const {
    if (rows == 0 || compute_cols == 0) throw ConfigError("array: rows and compute_cols must be > 0");
    if (redundant_cols < 1) throw ConfigError("array: need at least the constant-bias redundant column");
  }
};

class DeployedSubArray;

template <class Urbg>
DeployedSubArray deploy(const BitMatrix& slice, const ResistanceModel& model, const SubArrayConfig& cfg, Urbg& rng,
                        std::span<const std::size_t> forced_faulty_columns = {});

class DeployedSubArray {
public:
  const SubArrayConfig& config() const { return config_; }
  std::size_t used_rows() const { return used_rows_; }

  /// Physical column serving logical compute column k.
  std::span<const std::size_t> active_columns() const { return active_; }
  std::span<const std::size_t> inactive_columns() const { return inactive_; }

  const DeviceSample& device(std::size_t row, std::size_t col) const {
    return devices_[row * config_.total_cols() + col];
  }

  /// Logical weight a_ij as programmed (LRS == 1).
  bool weight(std::size_t row, std::size_t k) const {
    return device(row, active_[k]).state == ResistanceState::LRS;
  }

private:
  template <class Urbg>
  friend DeployedSubArray deploy(const BitMatrix&, const ResistanceModel&, const SubArrayConfig&, Urbg&,
                                 std::span<const std::size_t>);

  SubArrayConfig config_;
  std::size_t used_rows_ = 0;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> inactive_;
  std::vector<DeviceSample> devices_;
};

/// Maps a rows x compute_cols slice onto a sub-array. Device faults are drawn
/// first; columns in `forced_faulty_columns` are treated as fully faulty.
/// Faulty non-bias columns become inactive spares and the lowest-indexed
/// fault-free columns carry the computation, in order. Unused rows and spare
/// columns are programmed HRS.
template <class Urbg>
DeployedSubArray deploy(const BitMatrix& slice, const ResistanceModel& model, const SubArrayConfig& cfg, Urbg& rng,
                        std::span<const std::size_t> forced_faulty_columns) {
  cfg.validate();
  if (slice.cols() != cfg.compute_cols || slice.rows() > cfg.rows) {
    throw DimensionError("deploy: slice is " + std::to_string(slice.rows()) + "x" + std::to_string(slice.cols()) +
                         ", sub-array accepts up to " + std::to_string(cfg.rows) + "x" +
                         std::to_string(cfg.compute_cols));
  }
  const std::size_t cols = cfg.total_cols();

  std::vector<DeviceFault> faults(cfg.rows * cols, DeviceFault::None);
  for (auto& f : faults) f = sample_fault(model, rng);
  std::vector<bool> column_faulty(cols, false);
  for (std::size_t c : forced_faulty_columns) {
    if (c >= cols) throw DimensionError("deploy: forced faulty column " + std::to_string(c) + " out of range");
    column_faulty[c] = true;
    for (std::size_t r = 0; r < cfg.rows; ++r) faults[r * cols + c] = DeviceFault::StuckFault;
  }
  for (std::size_t r = 0; r < cfg.rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (faults[r * cols + c] == DeviceFault::StuckFault) column_faulty[c] = true;
    }
  }

  DeployedSubArray sub;
  sub.config_ = cfg;
  sub.used_rows_ = slice.rows();
  std::size_t faulty_candidates = 0;
  for (std::size_t c = 0; c < cfg.bias_col(); ++c) {
    if (column_faulty[c]) {
      ++faulty_candidates;
    } else if (sub.active_.size() < cfg.compute_cols) {
      sub.active_.push_back(c);
      continue;
    }
    sub.inactive_.push_back(c);
  }
  if (faulty_candidates > cfg.spare_slots()) {
    throw DeploymentError("deploy: " + std::to_string(faulty_candidates) + " faulty columns but only " +
                          std::to_string(cfg.spare_slots()) + " spare slots");
  }

  std::vector<int> logical_of(cols, -1);
  for (std::size_t k = 0; k < sub.active_.size(); ++k) logical_of[sub.active_[k]] = static_cast<int>(k);

  sub.devices_.resize(cfg.rows * cols);
  for (std::size_t r = 0; r < cfg.rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      ResistanceState state = ResistanceState::HRS;
      if (c == cfg.bias_col()) {
        state = ResistanceState::LRS;
      } else if (logical_of[c] >= 0 && r < slice.rows() && slice.get(r, static_cast<std::size_t>(logical_of[c]))) {
        state = ResistanceState::LRS;
      }
      DeviceSample d = sample_resistance(model, state, rng);
      d.fault = faults[r * cols + c];
      sub.devices_[r * cols + c] = d;
    }
  }
  return sub;
}

/// Accumulated source-line current of one row (uA): the active compute units
/// gated by x plus the always-on constant-bias unit. Spares are driven with 0.
inline double row_current(const DeployedSubArray& sub, std::size_t row, const BitVector& x_slice,
                          const CellParams& cell, const ResistanceModel& model, CellVariant variant) {
  const auto& cfg = sub.config();
  if (row >= cfg.rows) throw DimensionError("row_current: row " + std::to_string(row) + " out of range");
  if (x_slice.size() != cfg.compute_cols) throw DimensionError("row_current: input slice width mismatch");
  const auto active = sub.active_columns();
  double sum = 0.0;
  for (std::size_t k = 0; k < active.size(); ++k) {
    sum += unit_current(x_slice.get(k), sub.device(row, active[k]), cell, model, variant);
  }
  sum += unit_current(true, sub.device(row, cfg.bias_col()), cell, model, variant);
  return sum;
}

/// Same as row_current, with per-read retention jitter applied to each
/// activated device.
template <class Urbg>
double row_current(const DeployedSubArray& sub, std::size_t row, const BitVector& x_slice, const CellParams& cell,
                   const ResistanceModel& model, CellVariant variant, Urbg& rng) {
  if (model.read_noise_rel == 0.0) return row_current(sub, row, x_slice, cell, model, variant);
  const auto& cfg = sub.config();
  if (row >= cfg.rows) throw DimensionError("row_current: row " + std::to_string(row) + " out of range");
  if (x_slice.size() != cfg.compute_cols) throw DimensionError("row_current: input slice width mismatch");
  const auto active = sub.active_columns();
  double sum = 0.0;
  for (std::size_t k = 0; k < active.size(); ++k) {
    if (!x_slice.get(k)) continue;
    sum += unit_current(true, read_device(sub.device(row, active[k]), model, rng), cell, model, variant);
  }
  sum += unit_current(true, read_device(sub.device(row, cfg.bias_col()), model, rng), cell, model, variant);
  return sum;
}

// ---------------------------------------------------------------------------
// Signal-margin analysis over abstract rows of `cells` AND units.

struct CurrentStats {
  std::uint64_t count = 0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  double mean = 0.0;
  double m2 = 0.0; // sum of squared deviations

  void add(double x) {
    ++count;
    min = std::min(min, x);
    max = std::max(max, x);
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  void merge(const CurrentStats& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double n = static_cast<double>(count + o.count);
    const double delta = o.mean - mean;
    mean += delta * static_cast<double>(o.count) / n;
    m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / n;
    count += o.count;
    min = std::min(min, o.min);
    max = std::max(max, o.max);
  }

  double stddev() const { return count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1)) : 0.0; }
};

struct ScenarioStats {
  unsigned macv = 0;    // activated LRS units
  unsigned leaking = 0; // activated HRS units
  double probability = 0.0;
  CurrentStats current;
};

struct MacvEnvelope {
  unsigned macv = 0;
  unsigned scenario_count = 0;
  double min_ua = 0.0;
  double max_ua = 0.0;
  double mean_ua = 0.0; // scenario-probability weighted
  double std_ua = 0.0;
  double gap_to_next_ua = std::numeric_limits<double>::quiet_NaN();
};

struct MarginReport {
  unsigned cells = 10;
  std::uint64_t trials_per_scenario = 0;
  std::vector<ScenarioStats> scenarios;
  std::vector<MacvEnvelope> envelopes;
  double worst_gap_ua = 0.0;
  bool non_overlapping = false;
};

struct MarginOptions {
  unsigned cells = 10;
  std::uint64_t trials_per_scenario = 100000;
  double weight_density = 0.5;
  double input_density = 0.5;
  std::uint64_t seed = 1;
  unsigned jobs = 0;
};

/// Number of leakage scenarios for a given MACV on a row of `cells` units.
constexpr unsigned scenario_count(unsigned macv, unsigned cells = 10) { return macv > cells ? 0 : cells - macv + 1; }

/// For every (MACV m, leaking k) with m + k <= cells, Monte Carlo of
/// I_MC = sum of m LRS unit currents + k activated-HRS leakages, then the
/// per-MACV envelopes and the gaps min(m+1) - max(m).
inline MarginReport margin_analysis(const ResistanceModel& model, const CellParams& cell, CellVariant variant,
                                    const MarginOptions& opt = {}) {
  if (opt.trials_per_scenario < 10000) throw std::invalid_argument("margin_analysis: needs >= 1e4 trials per scenario");
  model.validate();
  cell.validate();

  MarginReport report;
  report.cells = opt.cells;
  report.trials_per_scenario = opt.trials_per_scenario;

  const double p_lrs = opt.input_density * opt.weight_density;
  const double p_hrs = opt.input_density * (1.0 - opt.weight_density);
  const double p_off = 1.0 - opt.input_density;
  auto multinomial = [&](unsigned m, unsigned k) {
    const unsigned off = opt.cells - m - k;
    const double log_coef = std::lgamma(opt.cells + 1.0) - std::lgamma(m + 1.0) - std::lgamma(k + 1.0) -
                            std::lgamma(off + 1.0);
    auto term = [](double p, unsigned n) { return n == 0 ? 0.0 : n * std::log(p); };
    if ((m > 0 && p_lrs == 0) || (k > 0 && p_hrs == 0) || (off > 0 && p_off == 0)) return 0.0;
    return std::exp(log_coef + term(p_lrs, m) + term(p_hrs, k) + term(p_off, off));
  };

  std::uint64_t scenario_id = 0;
  for (unsigned m = 0; m <= opt.cells; ++m) {
    for (unsigned k = 0; m + k <= opt.cells; ++k, ++scenario_id) {
      auto partials = run_blocks<CurrentStats>(
          opt.trials_per_scenario, kDefaultBlockSize, opt.jobs,
          [&, m, k, scenario_id](std::uint64_t block, std::uint64_t begin, std::uint64_t end) {
            Rng rng = make_stream(opt.seed, StreamDomain::Margin, (scenario_id << 32) | block);
            CurrentStats s;
            for (std::uint64_t t = begin; t < end; ++t) {
              double sum = 0.0;
              for (unsigned i = 0; i < m; ++i) {
                sum += unit_current(true, sample_resistance(model, ResistanceState::LRS, rng), cell, model, variant);
              }
              for (unsigned i = 0; i < k; ++i) {
                sum += unit_current(true, sample_resistance(model, ResistanceState::HRS, rng), cell, model, variant);
              }
              s.add(sum);
            }
            return s;
          });
      ScenarioStats sc{m, k, multinomial(m, k), {}};
      for (const auto& p : partials) sc.current.merge(p);
      report.scenarios.push_back(sc);
    }
  }

  for (unsigned m = 0; m <= opt.cells; ++m) {
    MacvEnvelope env;
    env.macv = m;
    env.min_ua = std::numeric_limits<double>::infinity();
    env.max_ua = -std::numeric_limits<double>::infinity();
    double weight_sum = 0.0;
    double weighted_mean = 0.0;
    double weighted_second = 0.0;
    for (const auto& sc : report.scenarios) {
      if (sc.macv != m) continue;
      ++env.scenario_count;
      env.min_ua = std::min(env.min_ua, sc.current.min);
      env.max_ua = std::max(env.max_ua, sc.current.max);
      const double var = sc.current.stddev() * sc.current.stddev();
      weight_sum += sc.probability;
      weighted_mean += sc.probability * sc.current.mean;
      weighted_second += sc.probability * (var + sc.current.mean * sc.current.mean);
    }
    if (weight_sum > 0) {
      env.mean_ua = weighted_mean / weight_sum;
      env.std_ua = std::sqrt(std::max(0.0, weighted_second / weight_sum - env.mean_ua * env.mean_ua));
    }
    report.envelopes.push_back(env);
  }

  report.worst_gap_ua = std::numeric_limits<double>::infinity();
  for (unsigned m = 0; m < opt.cells; ++m) {
    const double gap = report.envelopes[m + 1].min_ua - report.envelopes[m].max_ua;
    report.envelopes[m].gap_to_next_ua = gap;
    report.worst_gap_ua = std::min(report.worst_gap_ua, gap);
  }
  report.non_overlapping = report.worst_gap_ua > 0.0;
  return report;
}

} // namespace rramcim
