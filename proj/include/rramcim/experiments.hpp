#pragma once

// The six experiments behind the CLI. Each returns a Report: a JSON document
// (schema in docs/reports.md), a CSV table and a one-line summary. Reports
// depend only on the resolved config, never on the worker count.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp> // nlohmann, vendored

#include "rramcim/array.hpp"
#include "rramcim/bitlinalg.hpp"
#include "rramcim/cell.hpp"
#include "rramcim/config.hpp"
#include "rramcim/errors.hpp"
#include "rramcim/perfmodel.hpp"
#include "rramcim/protocol.hpp"
#include "rramcim/rng.hpp"
#include "rramcim/system.hpp"

namespace rramcim {

inline constexpr int kReportVersion = 1;

inline constexpr std::array<std::string_view, 6> kExperiments{"verify", "margins", "ber-sweep",
                                                              "perf",   "protocol", "trace"};

inline bool is_experiment(std::string_view name) {
  return std::find(kExperiments.begin(), kExperiments.end(), name) != kExperiments.end();
}

struct Report {
  std::string experiment;
  nlohmann::ordered_json json;
  std::string csv;
  std::string summary;
  bool passed = true;
};

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Monte Carlo entry points reject out-of-range counts with invalid_argument;
// at this level those are configuration problems.
template <class Fn>
auto as_config_error(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const DimensionError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline Report make_report(const AppConfig& c, std::string experiment, nlohmann::ordered_json results,
                          nlohmann::ordered_json checks, bool passed, std::string summary, std::string csv);

} // namespace detail

inline nlohmann::ordered_json performance_json(const PerfParams& p, const FpgaReference& f) {
  nlohmann::ordered_json j;
  j["op_convention"] = "one op per MAC bit (ops_per_mac = 1)";
  j["throughput_bps"] = throughput_bits_per_sec(p);
  j["throughput_gbps"] = throughput_bits_per_sec(p) / 1e9;
  j["ops_per_sec"] = ops_per_sec(p);
  j["tops_per_watt"] = energy_efficiency_tops_per_watt(p);
  j["fpga_tops_per_watt"] = energy_efficiency_tops_per_watt(f);
  j["improvement_vs_fpga"] = efficiency_improvement(p, f);
  j["readout_power_w"] = readout_power_budget(p.rows, p.pcspc_power_per_row_w);
  j["readout_power_share"] = readout_power_share(p);
  j["total_power_w"] = p.total_power_w;
  return j;
}

inline Report detail::make_report(const AppConfig& c, std::string experiment, nlohmann::ordered_json results,
                                  nlohmann::ordered_json checks, bool passed, std::string summary, std::string csv) {
  Report r;
  r.experiment = experiment;
  r.passed = passed;
  r.summary = summary;
  r.csv = std::move(csv);
  auto& j = r.json;
  j["report_version"] = kReportVersion;
  j["experiment"] = experiment;
  j["status"] = passed ? "pass" : "fail";
  j["summary"] = summary;
  if (c.timestamp) j["generated_at"] = utc_now();
  j["config"] = to_json(c);
  j["checks"] = checks.is_null() ? nlohmann::ordered_json::object() : std::move(checks);
  j["results"] = std::move(results);
  j["performance"] = performance_json(c.perf, c.fpga);
  return r;
}

/// Drops the fields that legitimately differ between identical runs.
inline nlohmann::ordered_json comparable(nlohmann::ordered_json j) {
  j.erase("generated_at");
  return j;
}

// ---------------------------------------------------------------------------

inline Report run_verify(const AppConfig& c) {
  // Ideal limit: devices at their means, comparator noise as configured.
  const SystemConfig cfg = with_ideal_devices(c.system);
  const std::size_t width = cfg.input_width();

  struct Instance {
    std::size_t rows = 0;
    std::size_t mismatched_bits = 0;
  };
  std::vector<Instance> instances;

  auto run_one = [&](const BitMatrix& a, const BitVector& x, Rng& rng) {
    const BitVector y = run_bmvm(a, x, cfg, rng).y;
    const BitVector oracle = bmvm_exact(a, x);
    instances.push_back({a.rows(), (y ^ oracle).popcount()});
  };

  if (!c.verify.matrix_path.empty()) {
    const BitMatrix a = load_matrix(c.verify.matrix_path);
    Rng rng = make_stream(c.seed, StreamDomain::Instance, 0);
    const BitVector x = c.verify.vector_path.empty() ? BitVector::random(a.cols(), rng, cfg.input_density)
                                                     : load_vector(c.verify.vector_path);
    if (x.size() != a.cols()) throw DimensionError("verify: vector length does not match matrix columns");
    run_one(a, x, rng);
  } else {
    const std::uint64_t n = effective_trials(c, c.verify.instances);
    for (std::uint64_t i = 0; i < n; ++i) {
      Rng rng = make_stream(c.seed, StreamDomain::Instance, i);
      const BitMatrix a = BitMatrix::random(cfg.subarray.rows, width, rng, cfg.weight_density);
      const BitVector x = BitVector::random(width, rng, cfg.input_density);
      run_one(a, x, rng);
    }
  }

  Rng row_rng = make_stream(c.seed, StreamDomain::Instance, std::uint64_t{1} << 40);
  const BitVector weights = BitVector::random(cfg.subarray.compute_cols, row_rng, cfg.weight_density);
  const ExhaustiveRowResult exhaustive = exhaustive_row_check(weights, cfg, row_rng);

  std::size_t total_rows = 0;
  std::size_t total_bad = 0;
  std::size_t worst_rows = 0;
  std::size_t worst_match = 0;
  std::uint64_t failing_instances = 0;
  bool first = true;
  nlohmann::ordered_json per_instance = nlohmann::ordered_json::array();
  std::ostringstream csv;
  csv << "check,index,total,matching,mismatching\n";
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& in = instances[i];
    total_rows += in.rows;
    total_bad += in.mismatched_bits;
    failing_instances += in.mismatched_bits > 0;
    const std::size_t match = in.rows - in.mismatched_bits;
    if (first || match < worst_match) {
      worst_match = match;
      worst_rows = in.rows;
      first = false;
    }
    per_instance.push_back(in.mismatched_bits);
    csv << "instance," << i << ',' << in.rows << ',' << match << ',' << in.mismatched_bits << '\n';
  }
  csv << "exhaustive_row,0," << exhaustive.inputs << ',' << exhaustive.matches << ','
      << exhaustive.inputs - exhaustive.matches << '\n';

  const bool oracle_ok = total_bad == 0;
  const bool exhaustive_ok = exhaustive.all_match();

  nlohmann::ordered_json results;
  results["instances"] = instances.size();
  results["rows_checked"] = total_rows;
  results["mismatched_bits"] = total_bad;
  results["failing_instances"] = failing_instances;
  results["worst_instance_matching_rows"] = worst_match;
  results["mismatched_bits_per_instance"] = per_instance;
  results["exhaustive_row"] = {{"weights", weights.to_string()},
                               {"inputs", exhaustive.inputs},
                               {"matches", exhaustive.matches}};
  nlohmann::ordered_json checks;
  checks["oracle_equivalence"] = oracle_ok;
  checks["exhaustive_row_decode"] = exhaustive_ok;

  std::ostringstream summary;
  summary << worst_match << '/' << worst_rows << " rows match oracle";
  if (instances.size() > 1) {
    summary << " (worst of " << instances.size() << " instances, " << total_bad << " mismatched bits in total)";
  }
  summary << "; exhaustive row decode " << exhaustive.matches << '/' << exhaustive.inputs;
  return detail::make_report(c, "verify", std::move(results), std::move(checks), oracle_ok && exhaustive_ok,
                             summary.str(), csv.str());
}

inline Report run_margins(const AppConfig& c) {
  MarginOptions opt;
  opt.cells = static_cast<unsigned>(c.system.subarray.compute_cols + 1);
  opt.trials_per_scenario = effective_trials(c, c.margins.trials_per_scenario);
  opt.weight_density = c.system.weight_density;
  opt.input_density = c.system.input_density;
  opt.seed = c.seed;
  opt.jobs = c.jobs;
  const MarginReport m =
      detail::as_config_error([&] { return margin_analysis(c.system.device, c.system.cell, c.system.variant, opt); });

  const auto ratio_trials = c.margins.r_ratio_trials;
  Rng rc = make_stream(c.seed, StreamDomain::RRatio, 0);
  Rng rb = make_stream(c.seed, StreamDomain::RRatio, 1);
  const double r_comp =
      effective_r_ratio(CellVariant::Compensated, c.system.cell, c.system.device, ratio_trials, rc);
  const double r_base =
      effective_r_ratio(CellVariant::Baseline1T1R, c.system.cell, c.system.device, ratio_trials, rb);

  std::ostringstream csv;
  csv << "macv,scenario_count,min_ua,max_ua,mean_ua,std_ua,gap_to_next_ua,non_overlapping\n";
  nlohmann::ordered_json envelopes = nlohmann::ordered_json::array();
  for (const auto& e : m.envelopes) {
    const bool has_next = e.macv < m.cells;
    const bool ok = !has_next || e.gap_to_next_ua > 0;
    csv << e.macv << ',' << e.scenario_count << ',' << detail::num(e.min_ua) << ',' << detail::num(e.max_ua) << ','
        << detail::num(e.mean_ua) << ',' << detail::num(e.std_ua) << ','
        << (has_next ? detail::num(e.gap_to_next_ua) : std::string()) << ',' << (ok ? "true" : "false") << '\n';
    nlohmann::ordered_json je{{"macv", e.macv},     {"scenario_count", e.scenario_count},
                              {"min_ua", e.min_ua}, {"max_ua", e.max_ua},
                              {"mean_ua", e.mean_ua}, {"std_ua", e.std_ua}};
    je["gap_to_next_ua"] = has_next ? nlohmann::ordered_json(e.gap_to_next_ua) : nlohmann::ordered_json(nullptr);
    envelopes.push_back(std::move(je));
  }
  nlohmann::ordered_json scenarios = nlohmann::ordered_json::array();
  for (const auto& s : m.scenarios) {
    scenarios.push_back({{"macv", s.macv},
                         {"leaking", s.leaking},
                         {"probability", s.probability},
                         {"min_ua", s.current.min},
                         {"max_ua", s.current.max},
                         {"mean_ua", s.current.mean},
                         {"std_ua", s.current.stddev()}});
  }

  nlohmann::ordered_json results;
  results["variant"] = to_string(c.system.variant);
  results["cells"] = m.cells;
  results["trials_per_scenario"] = m.trials_per_scenario;
  results["worst_gap_ua"] = m.worst_gap_ua;
  results["non_overlapping"] = m.non_overlapping;
  results["envelopes"] = std::move(envelopes);
  results["scenarios"] = std::move(scenarios);
  results["r_ratio"] = {{"trials", ratio_trials},
                        {"compensated", r_comp},
                        {"baseline", r_base},
                        {"improvement", r_comp / r_base}};
  nlohmann::ordered_json checks;
  checks["non_overlapping"] = m.non_overlapping;

  std::ostringstream summary;
  summary << m.envelopes.size() << " MACV levels, worst adjacent gap " << detail::num(m.worst_gap_ua) << " uA, "
          << (m.non_overlapping ? "non-overlapping" : "OVERLAPPING") << "; R-ratio " << detail::num(r_comp)
          << " (baseline " << detail::num(r_base) << ")";
  return detail::make_report(c, "margins", std::move(results), std::move(checks), m.non_overlapping, summary.str(),
                             csv.str());
}

inline Report run_ber_sweep(const AppConfig& c) {
  SystemConfig cfg = c.system;
  BerOptions opt;
  opt.jobs = c.jobs;
  const auto& s = c.ber_sweep;

  nlohmann::ordered_json calibration = nullptr;
  if (s.calibrate) {
    const NoiseCalibration cal = detail::as_config_error(
        [&] { return calibrate_comparator_noise(cfg, s.calibration_bits, s.target_ber, s.calibration_trials, opt); });
    cfg.pcspc.comparator_noise_sigma_v = cal.sigma_v;
    calibration = {{"compute_bits", s.calibration_bits},
                   {"target_ber", cal.target_ber},
                   {"trials", cal.trials},
                   {"device_errors", cal.device_errors},
                   {"sigma_v", cal.sigma_v}};
  }

  std::vector<unsigned> bits = s.compute_bits;
  std::sort(bits.begin(), bits.end());
  bits.erase(std::unique(bits.begin(), bits.end()), bits.end());
  const std::uint64_t trials = effective_trials(c, s.trials);

  std::ostringstream csv;
  csv << "compute_bits,trials,errors,ber,ci_low,ci_high,upper_bound_only,sigma_v\n";
  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  bool monotone = true;
  double previous = -1.0;
  std::optional<BerEstimate> at_calibration;
  for (unsigned b : bits) {
    const BerEstimate e = estimate_ber(cfg, b, trials, opt);
    if (e.ber < previous) monotone = false;
    previous = e.ber;
    if (b == s.calibration_bits) at_calibration = e;
    csv << b << ',' << e.trials << ',' << e.errors << ',' << detail::num(e.ber) << ',' << detail::num(e.ci_low) << ','
        << detail::num(e.ci_high) << ',' << (e.upper_bound_only ? "true" : "false") << ','
        << detail::num(cfg.pcspc.comparator_noise_sigma_v) << '\n';
    points.push_back({{"compute_bits", b},
                      {"trials", e.trials},
                      {"errors", e.errors},
                      {"ber", e.ber},
                      {"ci95", {e.ci_low, e.ci_high}},
                      {"upper_bound_only", e.upper_bound_only}});
  }

  nlohmann::ordered_json checks;
  checks["monotone_in_compute_bits"] = monotone;
  bool passed = monotone;
  std::ostringstream summary;
  summary << "BER over compute_bits {";
  for (std::size_t i = 0; i < bits.size(); ++i) summary << (i ? "," : "") << bits[i];
  summary << "} " << (monotone ? "monotone" : "NOT monotone");
  if (s.calibrate && at_calibration) {
    const bool in_band = at_calibration->ber >= s.target_ber / 10 && at_calibration->ber <= s.target_ber * 10;
    checks["calibrated_point_within_decade"] = in_band;
    passed = passed && in_band;
    summary << "; sigma " << detail::num(cfg.pcspc.comparator_noise_sigma_v) << " V gives BER "
            << detail::num(at_calibration->ber) << " at " << s.calibration_bits << " bits (target "
            << detail::num(s.target_ber) << ")";
  }

  nlohmann::ordered_json results;
  results["comparator_noise_sigma_v"] = cfg.pcspc.comparator_noise_sigma_v;
  results["calibration"] = std::move(calibration);
  results["points"] = std::move(points);
  return detail::make_report(c, "ber-sweep", std::move(results), std::move(checks), passed, summary.str(), csv.str());
}

inline Report run_perf(const AppConfig& c) {
  const auto perf = performance_json(c.perf, c.fpga);
  std::ostringstream csv;
  csv << "metric,value,unit\n";
  csv << "throughput," << detail::num(throughput_bits_per_sec(c.perf) / 1e9) << ",Gbps\n";
  csv << "energy_efficiency," << detail::num(energy_efficiency_tops_per_watt(c.perf)) << ",TOPS/W\n";
  csv << "fpga_energy_efficiency," << detail::num(energy_efficiency_tops_per_watt(c.fpga)) << ",TOPS/W\n";
  csv << "improvement_vs_fpga," << detail::num(efficiency_improvement(c.perf, c.fpga)) << ",x\n";
  csv << "readout_power," << detail::num(readout_power_budget(c.perf.rows, c.perf.pcspc_power_per_row_w) * 1e3)
      << ",mW\n";
  csv << "readout_power_share," << detail::num(readout_power_share(c.perf) * 100) << ",%\n";

  std::ostringstream summary;
  summary << detail::num(throughput_bits_per_sec(c.perf) / 1e9) << " Gbps, "
          << detail::num(energy_efficiency_tops_per_watt(c.perf)) << " TOPS/W (FPGA "
          << detail::num(energy_efficiency_tops_per_watt(c.fpga)) << ", "
          << detail::num(efficiency_improvement(c.perf, c.fpga)) << "x)";
  return detail::make_report(c, "perf", perf, nullptr, true, summary.str(), csv.str());
}

inline Report run_protocol(const AppConfig& c) {
  ProtocolParams params = c.protocol.params;
  if (c.trials) params.genuine_trials = params.impostor_trials = *c.trials;
  std::vector<double> bers = c.protocol.bers;
  std::sort(bers.begin(), bers.end());
  bers.erase(std::unique(bers.begin(), bers.end()), bers.end());

  std::ostringstream csv;
  csv << "ber,genuine_trials,impostor_trials,frr_base,frr,frr_expected,frr_delta,frr_delta_realized,far_base,far,"
         "far_expected\n";
  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  bool far_zero = true;
  bool monotone = true;
  double previous = -std::numeric_limits<double>::infinity();
  double far_at_max = 0.0;
  for (double ber : bers) {
    const ProtocolResult r = detail::as_config_error([&] { return protocol_impact(ber, params, c.seed, c.jobs); });
    far_zero = far_zero && r.false_accepts == 0;
    monotone = monotone && r.frr_delta >= previous;
    previous = r.frr_delta;
    far_at_max = r.far;
    csv << detail::num(ber) << ',' << r.genuine_trials << ',' << r.impostor_trials << ',' << detail::num(r.frr_base)
        << ',' << detail::num(r.frr) << ',' << detail::num(r.frr_expected) << ',' << detail::num(r.frr_delta) << ','
        << detail::num(r.frr_delta_realized) << ',' << detail::num(r.far_base) << ',' << detail::num(r.far) << ','
        << detail::num(r.far_expected) << '\n';
    points.push_back({{"ber", ber},
                      {"genuine_trials", r.genuine_trials},
                      {"impostor_trials", r.impostor_trials},
                      {"threshold", r.threshold},
                      {"false_rejects_base", r.false_rejects_base},
                      {"false_rejects", r.false_rejects},
                      {"false_accepts_base", r.false_accepts_base},
                      {"false_accepts", r.false_accepts},
                      {"frr_base", r.frr_base},
                      {"frr", r.frr},
                      {"frr_expected", r.frr_expected},
                      {"frr_delta", r.frr_delta},
                      {"frr_delta_realized", r.frr_delta_realized},
                      {"far_base", r.far_base},
                      {"far", r.far},
                      {"far_expected", r.far_expected}});
  }

  nlohmann::ordered_json checks;
  checks["far_zero"] = far_zero;
  checks["frr_delta_monotone"] = monotone;
  nlohmann::ordered_json results;
  results["threshold"] = params.threshold();
  results["points"] = std::move(points);

  std::ostringstream summary;
  summary << "FAR " << (far_zero ? "0 at every BER" : "NONZERO") << " (max BER " << detail::num(bers.back())
          << ": " << detail::num(far_at_max) << "); FRR delta " << (monotone ? "monotone" : "NOT monotone")
          << ", " << detail::num(previous) << " at the largest BER";
  return detail::make_report(c, "protocol", std::move(results), std::move(checks), far_zero && monotone,
                             summary.str(), csv.str());
}

inline Report run_trace(const AppConfig& c) {
  const SystemConfig& cfg = c.system;
  if (c.trace.row >= cfg.subarray.rows) {
    throw ConfigError("trace row " + std::to_string(c.trace.row) + " outside 0.." +
                      std::to_string(cfg.subarray.rows - 1));
  }
  const std::size_t width = cfg.input_width();
  Rng rng = make_stream(c.seed, StreamDomain::Instance, 0);
  const BitMatrix a = BitMatrix::random(cfg.subarray.rows, width, rng, cfg.weight_density);
  const BitVector x = BitVector::random(width, rng, cfg.input_density);
  RunOptions opt;
  opt.record_diagnostics = true;
  opt.trace_row = c.trace.row;
  const BmvmRun run = run_bmvm(a, x, cfg, rng, opt);
  const bool oracle = bmvm_exact(a, x).get(c.trace.row);

  std::ostringstream csv;
  csv << "subarray,time_s,v_charge,event\n";
  nlohmann::ordered_json subs = nlohmann::ordered_json::array();
  const auto& diag = run.diagnostics[c.trace.row];
  for (std::size_t s = 0; s < diag.size(); ++s) {
    const auto& d = diag[s];
    const BitVector slice_w = a.column_slice(s * cfg.subarray.compute_cols, cfg.subarray.compute_cols).row(c.trace.row);
    const BitVector slice_x = x.slice(s * cfg.subarray.compute_cols, cfg.subarray.compute_cols);
    nlohmann::ordered_json wave = nlohmann::ordered_json::array();
    for (const auto& p : d.trace.waveform) {
      csv << s << ',' << detail::num(p.time_s) << ',' << detail::num(p.v_charge) << ',' << to_string(p.event) << '\n';
      wave.push_back({p.time_s, p.v_charge, to_string(p.event)});
    }
    subs.push_back({{"subarray", s},
                    {"hamming_weight", (slice_w & slice_x).popcount() + 1},
                    {"current_ua", d.current_ua},
                    {"ramp_pulse_count", d.trace.ramp_pulse_count},
                    {"v_charge_at_sample", d.trace.v_charge_at_sample},
                    {"comparator_bit", d.trace.comparator_bit},
                    {"xor_out", d.trace.xor_out},
                    {"expected_parity", parity(slice_w & slice_x)},
                    {"waveform", std::move(wave)}});
  }
  const bool y = run.y.get(c.trace.row);

  nlohmann::ordered_json results;
  results["row"] = c.trace.row;
  results["y"] = y;
  results["oracle"] = oracle;
  results["waveform_columns"] = {"time_s", "v_charge", "event"};
  results["subarrays"] = std::move(subs);

  std::ostringstream summary;
  summary << "row " << c.trace.row << ": y=" << y << " oracle=" << oracle << ", " << diag.size()
          << " waveforms recorded";
  return detail::make_report(c, "trace", std::move(results), nullptr, true, summary.str(), csv.str());
}

/// Runs `name` on a finalized config.
inline Report run_experiment(std::string_view name, const AppConfig& c) {
  if (name == "verify") return run_verify(c);
  if (name == "margins") return run_margins(c);
  if (name == "ber-sweep") return run_ber_sweep(c);
  if (name == "perf") return run_perf(c);
  if (name == "protocol") return run_protocol(c);
  if (name == "trace") return run_trace(c);
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

} // namespace rramcim
