#pragma once

// Run configuration: a JSON tree, every key optional, unknown keys rejected.
//
//   {
//     "config_version": 1,
//     "seed": 1, "jobs": 0, "trials": null, "format": "json",
//     "output_path": "", "timestamp": true,
//     "device":   { "lrs_mean_ohm": 6000, ... },
//     "cell":     { "variant": "compensated", "i_unit_ua": 4, ... },
//     "array":    { "rows": 512, "compute_cols": 9, "redundant_cols": 3, "subarray_count": 4 },
//     "workload": { "weight_density": 0.5, "input_density": 0.5 },
//     "pcspc":    { "grc_frequency_hz": 4e7, "v_th": 0.8, ... },
//     "perf": { ... }, "fpga": { ... },
//     "experiments": { "verify": {...}, "margins": {...}, "ber_sweep": {...},
//                      "protocol": {...}, "trace": {...} }
//   }
//
// docs/config.md lists every key.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp> // nlohmann, vendored

#include "rramcim/cell.hpp"
#include "rramcim/device.hpp"
#include "rramcim/errors.hpp"
#include "rramcim/pcspc.hpp"
#include "rramcim/perfmodel.hpp"
#include "rramcim/protocol.hpp"
#include "rramcim/system.hpp"

namespace rramcim {

inline constexpr int kConfigVersion = 1;

struct PcspcSettings {
  double grc_frequency_hz = 40e6;
  double v_th = 0.8;
  std::optional<double> v_ref;    // default v_th / 4
  std::optional<double> c1_farad; // default from the calibration rule
  double t_d_s = 1e-9;
  double charge_margin = 0.035;
  double comparator_noise_sigma_v = 0.0;
  double steps_per_period = 1000.0;
};

struct VerifySettings {
  std::uint64_t instances = 100;
  std::string matrix_path; // BMV1; one instance replaces the random ones
  std::string vector_path; // BMV1, one row; random when empty
};

struct MarginSettings {
  std::uint64_t trials_per_scenario = 100000;
  std::uint64_t r_ratio_trials = 100000;
};

struct BerSweepSettings {
  std::vector<unsigned> compute_bits{3, 5, 7, 9, 11};
  std::uint64_t trials = 10000000;
  bool calibrate = true;
  double target_ber = 1.6e-5;
  unsigned calibration_bits = 9;
  std::uint64_t calibration_trials = 4000000;
};

struct ProtocolSettings {
  ProtocolParams params;
  std::vector<double> bers{0.0, 1.6e-5, 1e-4, 1e-3};
};

struct TraceSettings {
  std::size_t row = 0;
};

struct AppConfig {
  int config_version = kConfigVersion;
  std::uint64_t seed = 1;
  unsigned jobs = 0;
  std::optional<std::uint64_t> trials;
  std::string format = "json";
  std::string output_path;
  bool timestamp = true;

  SystemConfig system; // pcspc and master_seed are filled by finalize()
  PcspcSettings pcspc;
  PerfParams perf;
  FpgaReference fpga;

  VerifySettings verify;
  MarginSettings margins;
  BerSweepSettings ber_sweep;
  ProtocolSettings protocol;
  TraceSettings trace;
};

inline PcspcParams build_pcspc(const PcspcSettings& s, double i_unit_ua) {
  PcspcDesign design;
  design.t_d_s = s.t_d_s;
  design.charge_margin = s.charge_margin;
  design.comparator_noise_sigma_v = s.comparator_noise_sigma_v;
  design.steps_per_period = s.steps_per_period;
  if (!(s.steps_per_period >= 1)) throw ConfigError("pcspc.steps_per_period must be >= 1");
  PcspcParams p;
  try {
    p = calibrate_params(i_unit_ua, s.grc_frequency_hz, s.v_th, design);
    if (s.v_ref) p.v_ref = *s.v_ref;
    if (s.c1_farad) p.c1_farad = *s.c1_farad;
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("pcspc: ") + e.what());
  }
  return p;
}

/// Derives the system config from the settings and checks every bound.
/// Call after CLI overrides.
inline void finalize(AppConfig& c) {
  if (c.config_version != kConfigVersion) {
    throw ConfigError("config_version " + std::to_string(c.config_version) + " is not supported (expected " +
                      std::to_string(kConfigVersion) + ")");
  }
  if (c.format != "json" && c.format != "csv") throw ConfigError("format must be \"json\" or \"csv\"");
  c.system.master_seed = c.seed;
  c.system.pcspc = build_pcspc(c.pcspc, c.system.cell.i_unit_ua);
  c.system.validate();

  auto positive = [](std::uint64_t v, const char* what) {
    if (v == 0) throw ConfigError(std::string(what) + " must be > 0");
  };
  positive(c.verify.instances, "experiments.verify.instances");
  if (!c.verify.vector_path.empty() && c.verify.matrix_path.empty()) {
    throw ConfigError("experiments.verify.vector_path needs matrix_path");
  }
  if (c.margins.trials_per_scenario < 10000 || c.margins.r_ratio_trials < 10000) {
    throw ConfigError("experiments.margins: trial counts must be >= 10000");
  }
  positive(c.ber_sweep.trials, "experiments.ber_sweep.trials");
  if (c.ber_sweep.compute_bits.empty()) throw ConfigError("experiments.ber_sweep.compute_bits is empty");
  for (unsigned b : c.ber_sweep.compute_bits) {
    if (b == 0 || b > 64) throw ConfigError("experiments.ber_sweep.compute_bits entries must lie in 1..64");
  }
  if (c.ber_sweep.calibrate) {
    if (!(c.ber_sweep.target_ber > 0 && c.ber_sweep.target_ber < 0.5)) {
      throw ConfigError("experiments.ber_sweep.target_ber must lie in (0, 0.5)");
    }
    if (c.ber_sweep.calibration_bits == 0 || c.ber_sweep.calibration_bits > 64) {
      throw ConfigError("experiments.ber_sweep.calibration_bits must lie in 1..64");
    }
    if (c.ber_sweep.target_ber * static_cast<double>(c.ber_sweep.calibration_trials) < 10) {
      throw ConfigError("experiments.ber_sweep: calibration_trials too small for target_ber (need >= 10 expected errors)");
    }
  }
  try {
    c.protocol.params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  positive(c.protocol.params.genuine_trials, "experiments.protocol.genuine_trials");
  positive(c.protocol.params.impostor_trials, "experiments.protocol.impostor_trials");
  if (c.protocol.bers.empty()) throw ConfigError("experiments.protocol.bers is empty");
  for (double b : c.protocol.bers) {
    if (!(b >= 0 && b <= 0.5)) throw ConfigError("experiments.protocol.bers entries must lie in [0, 0.5]");
  }
  for (double v : {c.perf.rows, c.perf.input_width, c.perf.frequency_hz, c.perf.total_power_w,
                   c.perf.pcspc_power_per_row_w, c.perf.ops_per_mac, c.fpga.throughput_bps, c.fpga.input_width,
                   c.fpga.power_w, c.fpga.ops_per_mac}) {
    if (!(std::isfinite(v) && v > 0)) throw ConfigError("perf/fpga values must be finite and > 0");
  }
}

/// The Monte Carlo count an experiment runs with: the top-level `trials`
/// override when present, otherwise the experiment's own setting.
inline std::uint64_t effective_trials(const AppConfig& c, std::uint64_t experiment_setting) {
  return c.trials ? *c.trials : experiment_setting;
}

namespace detail {

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Section {
public:
  Section(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const nlohmann::json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const char* key, double& out) {
    if (const auto* v = child(key)) {
      if (!v->is_number()) throw ConfigError(name(key) + " must be a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(name(key) + " must be finite");
    }
  }

  void number(const char* key, std::optional<double>& out) {
    if (const auto* v = child(key)) {
      if (v->is_null()) {
        out.reset();
        return;
      }
      double d = 0.0;
      seen_.erase(key);
      number(key, d);
      out = d;
    }
  }

  template <class Int>
  void count(const char* key, Int& out) {
    if (const auto* v = child(key)) out = as_count<Int>(*v, name(key));
  }

  void flag(const char* key, bool& out) {
    if (const auto* v = child(key)) {
      if (!v->is_boolean()) throw ConfigError(name(key) + " must be true or false");
      out = v->get<bool>();
    }
  }

  void text(const char* key, std::string& out) {
    if (const auto* v = child(key)) {
      if (!v->is_string()) throw ConfigError(name(key) + " must be a string");
      out = v->get<std::string>();
    }
  }

  template <class Int>
  void count_list(const char* key, std::vector<Int>& out) {
    if (const auto* v = child(key)) {
      if (!v->is_array()) throw ConfigError(name(key) + " must be an array");
      out.clear();
      for (const auto& e : *v) out.push_back(as_count<Int>(e, name(key)));
    }
  }

  void number_list(const char* key, std::vector<double>& out) {
    if (const auto* v = child(key)) {
      if (!v->is_array()) throw ConfigError(name(key) + " must be an array");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) throw ConfigError(name(key) + " entries must be numbers");
        out.push_back(e.get<double>());
      }
    }
  }

  Section sub(const char* key) {
    seen_.insert(key);
    return Section(j_.at(key), name(key));
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError("unknown key " + name(item.key()));
    }
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  template <class Int>
  static Int as_count(const nlohmann::json& v, const std::string& what) {
    if (!v.is_number()) throw ConfigError(what + " must be a non-negative integer");
    const double d = v.get<double>();
    if (!(d >= 0 && d == std::floor(d) && d <= 1.8e19 &&
          d <= static_cast<double>(std::numeric_limits<Int>::max()))) {
      throw ConfigError(what + " must be a non-negative integer");
    }
    if (v.is_number_unsigned()) return static_cast<Int>(v.get<std::uint64_t>());
    if (v.is_number_integer()) return static_cast<Int>(v.get<std::int64_t>());
    return static_cast<Int>(d);
  }

  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline CellVariant parse_variant(const std::string& s) {
  if (s == "compensated") return CellVariant::Compensated;
  if (s == "baseline") return CellVariant::Baseline1T1R;
  throw ConfigError("cell.variant must be \"compensated\" or \"baseline\"");
}

} // namespace detail

/// Builds an AppConfig from a parsed JSON tree. Does not finalize.
inline AppConfig parse_config(const nlohmann::json& root) {
  using detail::Section;
  AppConfig c;
  Section top(root, "");
  if (!top.has("config_version")) throw ConfigError("missing config_version");
  top.count("config_version", c.config_version);
  if (c.config_version != kConfigVersion) {
    throw ConfigError("config_version " + std::to_string(c.config_version) + " is not supported");
  }
  top.count("seed", c.seed);
  top.count("jobs", c.jobs);
  if (const auto* t = top.child("trials"); t && !t->is_null()) {
    std::uint64_t n = 0;
    const nlohmann::json wrapped{{"trials", *t}};
    Section(wrapped, "").count("trials", n);
    if (n == 0) throw ConfigError("trials must be > 0");
    c.trials = n;
  }
  top.text("format", c.format);
  top.text("output_path", c.output_path);
  top.flag("timestamp", c.timestamp);

  if (top.has("device")) {
    Section s = top.sub("device");
    auto& d = c.system.device;
    s.number("lrs_mean_ohm", d.lrs_mean_ohm);
    s.number("lrs_sigma_ohm", d.lrs_sigma_ohm);
    s.number("lrs_floor_ohm", d.lrs_floor_ohm);
    s.number("hrs_mean_ohm", d.hrs_mean_ohm);
    s.number("hrs_sigma_ohm", d.hrs_sigma_ohm);
    s.number("hrs_floor_ohm", d.hrs_floor_ohm);
    s.number("yield_fault_prob", d.yield_fault_prob);
    s.number("read_noise_rel", d.read_noise_rel);
    s.finish();
  }
  if (top.has("cell")) {
    Section s = top.sub("cell");
    auto& p = c.system.cell;
    std::string variant = to_string(c.system.variant);
    s.text("variant", variant);
    c.system.variant = detail::parse_variant(variant);
    s.number("i_unit_ua", p.i_unit_ua);
    s.number("v_read", p.v_read);
    s.number("r_lrs_nominal_ohm", p.r_lrs_nominal_ohm);
    s.number("target_r_ratio_compensated", p.target_r_ratio_compensated);
    s.number("target_r_ratio_baseline", p.target_r_ratio_baseline);
    s.number("compensation_bias_current_ua", p.compensation_bias_current_ua);
    s.number("stuck_current_ua", p.stuck_current_ua);
    s.finish();
  }
  if (top.has("array")) {
    Section s = top.sub("array");
    s.count("rows", c.system.subarray.rows);
    s.count("compute_cols", c.system.subarray.compute_cols);
    s.count("redundant_cols", c.system.subarray.redundant_cols);
    s.count("subarray_count", c.system.subarray_count);
    s.finish();
  }
  if (top.has("workload")) {
    Section s = top.sub("workload");
    s.number("weight_density", c.system.weight_density);
    s.number("input_density", c.system.input_density);
    s.finish();
  }
  if (top.has("pcspc")) {
    Section s = top.sub("pcspc");
    auto& p = c.pcspc;
    s.number("grc_frequency_hz", p.grc_frequency_hz);
    s.number("v_th", p.v_th);
    s.number("v_ref", p.v_ref);
    s.number("c1_farad", p.c1_farad);
    s.number("t_d_s", p.t_d_s);
    s.number("charge_margin", p.charge_margin);
    s.number("comparator_noise_sigma_v", p.comparator_noise_sigma_v);
    s.number("steps_per_period", p.steps_per_period);
    s.finish();
  }
  if (top.has("perf")) {
    Section s = top.sub("perf");
    s.number("rows", c.perf.rows);
    s.number("input_width", c.perf.input_width);
    s.number("frequency_hz", c.perf.frequency_hz);
    s.number("total_power_w", c.perf.total_power_w);
    s.number("pcspc_power_per_row_w", c.perf.pcspc_power_per_row_w);
    s.number("ops_per_mac", c.perf.ops_per_mac);
    s.finish();
  }
  if (top.has("fpga")) {
    Section s = top.sub("fpga");
    s.number("throughput_bps", c.fpga.throughput_bps);
    s.number("input_width", c.fpga.input_width);
    s.number("power_w", c.fpga.power_w);
    s.number("ops_per_mac", c.fpga.ops_per_mac);
    s.finish();
  }
  if (top.has("experiments")) {
    Section ex = top.sub("experiments");
    if (ex.has("verify")) {
      Section s = ex.sub("verify");
      s.count("instances", c.verify.instances);
      s.text("matrix_path", c.verify.matrix_path);
      s.text("vector_path", c.verify.vector_path);
      s.finish();
    }
    if (ex.has("margins")) {
      Section s = ex.sub("margins");
      s.count("trials_per_scenario", c.margins.trials_per_scenario);
      s.count("r_ratio_trials", c.margins.r_ratio_trials);
      s.finish();
    }
    if (ex.has("ber_sweep")) {
      Section s = ex.sub("ber_sweep");
      s.count_list("compute_bits", c.ber_sweep.compute_bits);
      s.count("trials", c.ber_sweep.trials);
      s.flag("calibrate", c.ber_sweep.calibrate);
      s.number("target_ber", c.ber_sweep.target_ber);
      s.count("calibration_bits", c.ber_sweep.calibration_bits);
      s.count("calibration_trials", c.ber_sweep.calibration_trials);
      s.finish();
    }
    if (ex.has("protocol")) {
      Section s = ex.sub("protocol");
      auto& p = c.protocol.params;
      s.count("feature_bits", p.feature_bits);
      s.count("challenge_rows", p.challenge_rows);
      s.number("row_density", p.row_density);
      s.number("intra_flip_rate", p.intra_flip_rate);
      s.number("inter_flip_rate", p.inter_flip_rate);
      s.number("accept_fraction", p.accept_fraction);
      s.count("genuine_trials", p.genuine_trials);
      s.count("impostor_trials", p.impostor_trials);
      s.number_list("bers", c.protocol.bers);
      s.finish();
    }
    if (ex.has("trace")) {
      Section s = ex.sub("trace");
      s.count("row", c.trace.row);
      s.finish();
    }
    ex.finish();
  }
  top.finish();
  return c;
}

inline AppConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  try {
    return parse_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// The resolved configuration, including derived PCSPC values. Feeding it
/// back through parse_config + finalize reproduces the same results.
/// Run-control keys (jobs, format, output_path, timestamp) are left out:
/// they never change results and reports must not depend on them.
inline nlohmann::ordered_json to_json(const AppConfig& c) {
  nlohmann::ordered_json j;
  j["config_version"] = c.config_version;
  j["seed"] = c.seed;
  j["trials"] = c.trials ? nlohmann::ordered_json(*c.trials) : nlohmann::ordered_json(nullptr);

  const auto& d = c.system.device;
  j["device"] = {{"lrs_mean_ohm", d.lrs_mean_ohm},       {"lrs_sigma_ohm", d.lrs_sigma_ohm},
                 {"lrs_floor_ohm", d.lrs_floor_ohm},     {"hrs_mean_ohm", d.hrs_mean_ohm},
                 {"hrs_sigma_ohm", d.hrs_sigma_ohm},     {"hrs_floor_ohm", d.hrs_floor_ohm},
                 {"yield_fault_prob", d.yield_fault_prob}, {"read_noise_rel", d.read_noise_rel}};
  const auto& p = c.system.cell;
  j["cell"] = {{"variant", to_string(c.system.variant)},
               {"i_unit_ua", p.i_unit_ua},
               {"v_read", p.v_read},
               {"r_lrs_nominal_ohm", p.r_lrs_nominal_ohm},
               {"target_r_ratio_compensated", p.target_r_ratio_compensated},
               {"target_r_ratio_baseline", p.target_r_ratio_baseline},
               {"compensation_bias_current_ua", p.compensation_bias_current_ua},
               {"stuck_current_ua", p.stuck_current_ua}};
  j["array"] = {{"rows", c.system.subarray.rows},
                {"compute_cols", c.system.subarray.compute_cols},
                {"redundant_cols", c.system.subarray.redundant_cols},
                {"subarray_count", c.system.subarray_count}};
  j["workload"] = {{"weight_density", c.system.weight_density}, {"input_density", c.system.input_density}};
  const auto& pc = c.system.pcspc;
  j["pcspc"] = {{"grc_frequency_hz", c.pcspc.grc_frequency_hz},
                {"v_th", pc.v_th},
                {"v_ref", pc.v_ref},
                {"c1_farad", pc.c1_farad},
                {"t_d_s", pc.t_d_s},
                {"charge_margin", c.pcspc.charge_margin},
                {"comparator_noise_sigma_v", pc.comparator_noise_sigma_v},
                {"steps_per_period", c.pcspc.steps_per_period}};
  j["perf"] = {{"rows", c.perf.rows},
               {"input_width", c.perf.input_width},
               {"frequency_hz", c.perf.frequency_hz},
               {"total_power_w", c.perf.total_power_w},
               {"pcspc_power_per_row_w", c.perf.pcspc_power_per_row_w},
               {"ops_per_mac", c.perf.ops_per_mac}};
  j["fpga"] = {{"throughput_bps", c.fpga.throughput_bps},
               {"input_width", c.fpga.input_width},
               {"power_w", c.fpga.power_w},
               {"ops_per_mac", c.fpga.ops_per_mac}};

  nlohmann::ordered_json ex;
  ex["verify"] = {{"instances", c.verify.instances},
                  {"matrix_path", c.verify.matrix_path},
                  {"vector_path", c.verify.vector_path}};
  ex["margins"] = {{"trials_per_scenario", c.margins.trials_per_scenario},
                   {"r_ratio_trials", c.margins.r_ratio_trials}};
  ex["ber_sweep"] = {{"compute_bits", c.ber_sweep.compute_bits},
                     {"trials", c.ber_sweep.trials},
                     {"calibrate", c.ber_sweep.calibrate},
                     {"target_ber", c.ber_sweep.target_ber},
                     {"calibration_bits", c.ber_sweep.calibration_bits},
                     {"calibration_trials", c.ber_sweep.calibration_trials}};
  const auto& pp = c.protocol.params;
  ex["protocol"] = {{"feature_bits", pp.feature_bits},
                    {"challenge_rows", pp.challenge_rows},
                    {"row_density", pp.row_density},
                    {"intra_flip_rate", pp.intra_flip_rate},
                    {"inter_flip_rate", pp.inter_flip_rate},
                    {"accept_fraction", pp.accept_fraction},
                    {"genuine_trials", pp.genuine_trials},
                    {"impostor_trials", pp.impostor_trials},
                    {"bers", c.protocol.bers}};
  ex["trace"] = {{"row", c.trace.row}};
  j["experiments"] = ex;
  return j;
}

} // namespace rramcim
