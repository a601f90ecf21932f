// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// all nine pass. Optional argv[1]: path to the rramcim CLI, used to repeat the
// determinism check through the --jobs flag.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "rramcim/rramcim.hpp"

using namespace rramcim;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double limit_s, const std::function<Outcome()>& fn) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool in_time = dt < limit_s;
  const bool pass = o.pass && in_time;
  failures += !pass;
  char timing[64];
  std::snprintf(timing, sizeof timing, "%.2f s (limit %.0f s)", dt, limit_s);
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << id << ". " << name << ": " << o.detail << "; " << timing
            << (in_time ? "" : " TOO SLOW") << std::endl;
}

bool within(double value, double target, double rel) { return std::fabs(value - target) <= rel * std::fabs(target); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Each experiment is run twice, with 1 and 4 workers. Criterion 9 compares the
// pair; the other criteria read the first report.
struct Pair {
  Report one;
  Report many;
  double seconds_one = 0;
};

std::map<std::string, Pair> runs;

const Report& experiment(const std::string& name) {
  auto it = runs.find(name);
  if (it != runs.end()) return it->second.one;
  AppConfig c;
  c.timestamp = false;
  c.jobs = 1;
  finalize(c);
  Pair p;
  const auto t0 = Clock::now();
  p.one = run_experiment(name, c);
  p.seconds_one = std::chrono::duration<double>(Clock::now() - t0).count();
  c.jobs = 4;
  p.many = run_experiment(name, c);
  return runs.emplace(name, std::move(p)).first->second.one;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";

  report(1, "oracle equivalence in the ideal limit", 60, [] {
    const auto& r = experiment("verify").json["results"];
    const auto bits = r["mismatched_bits"].get<std::uint64_t>();
    const auto n = r["instances"].get<std::uint64_t>();
    const auto rows = r["rows_checked"].get<std::uint64_t>();
    return Outcome{bits == 0 && n == 100 && rows == 100 * 512,
                   std::to_string(bits) + " mismatched bits over " + std::to_string(n) + " random 512x36 instances"};
  });

  report(2, "exhaustive single-row decode", 1, [] {
    const SystemConfig cfg = with_ideal_devices(SystemConfig{});
    Rng rng = make_stream(1, StreamDomain::Instance, 0);
    BitVector all_ones(9);
    for (std::size_t j = 0; j < 9; ++j) all_ones.set(j, true);
    const auto r = exhaustive_row_check(all_ones, cfg, rng);
    return Outcome{r.inputs == 512 && r.all_match(),
                   std::to_string(r.matches) + "/" + std::to_string(r.inputs) +
                       " inputs decode to the oracle parity (weights 111111111, stepped readout)"};
  });

  report(3, "PCSPC pulse law", 1, [] {
    const PcspcParams p = calibrate_params(4.0, 40e6, 0.8);
    int ok = 0;
    for (unsigned h = 0; h <= 10; ++h) {
      const auto t = simulate_readout(4.0 * h, p);
      ok += t.ramp_pulse_count == h / 2 && t.comparator_bit == (h % 2 == 1);
    }
    return Outcome{ok == 11, std::to_string(ok) + "/11 Hamming weights give pulses = floor(h/2), bit = h mod 2"};
  });

  report(4, "R-ratio reproduction", 10, [] {
    const CellParams p;
    const ResistanceModel m;
    Rng a = make_stream(1, StreamDomain::RRatio, 0);
    Rng b = make_stream(1, StreamDomain::RRatio, 1);
    const double comp = effective_r_ratio(CellVariant::Compensated, p, m, 100000, a);
    const double base = effective_r_ratio(CellVariant::Baseline1T1R, p, m, 100000, b);
    const bool ok = within(comp, 51.9, 0.05) && within(comp / base, 5.0, 0.10);
    return Outcome{ok, "compensated " + fmt(comp) + " (51.9 +/- 5%), compensated/baseline " + fmt(comp / base) +
                           " (5 +/- 10%), 1e5 samples each"};
  });

  report(5, "margin non-overlap", 300, [] {
    const auto& r = experiment("margins").json["results"];
    bool all_positive = true;
    std::size_t gaps = 0;
    for (const auto& e : r["envelopes"]) {
      if (e["gap_to_next_ua"].is_null()) continue;
      ++gaps;
      all_positive = all_positive && e["gap_to_next_ua"].get<double>() > 0;
    }
    const bool ok = all_positive && gaps == 10 && r["trials_per_scenario"].get<std::uint64_t>() >= 100000;
    return Outcome{ok, "worst gap " + fmt(r["worst_gap_ua"].get<double>()) + " uA over " + std::to_string(gaps) +
                           " adjacent MACV pairs, " + std::to_string(r["scenarios"].size()) +
                           " scenarios x 1e5 draws"};
  });

  report(6, "BER calibration target", 1800, [] {
    const auto& r = experiment("ber-sweep").json["results"];
    double ber9 = -1;
    std::uint64_t trials9 = 0;
    bool monotone = true;
    double last = -1;
    std::string curve;
    for (const auto& p : r["points"]) {
      const double ber = p["ber"].get<double>();
      monotone = monotone && ber >= last;
      last = ber;
      curve += (curve.empty() ? "" : ", ") + std::to_string(p["compute_bits"].get<unsigned>()) + ":" + fmt(ber);
      if (p["compute_bits"].get<unsigned>() == 9) {
        ber9 = ber;
        trials9 = p["trials"].get<std::uint64_t>();
      }
    }
    const bool ok = ber9 >= 1.6e-6 && ber9 <= 1.6e-4 && trials9 >= 10000000 && monotone;
    return Outcome{ok, "sigma " + fmt(r["comparator_noise_sigma_v"].get<double>()) + " V, BER(9) " + fmt(ber9) +
                           " over " + std::to_string(trials9) + " trials, in [1.6e-6, 1.6e-4]; curve {" + curve +
                           "} " + (monotone ? "monotone" : "NOT monotone")};
  });

  report(7, "performance arithmetic", 1, [] {
    const PerfParams p;
    const FpgaReference f;
    const double gbps = throughput_bits_per_sec(p) / 1e9;
    const double eff = energy_efficiency_tops_per_watt(p);
    const double fpga = energy_efficiency_tops_per_watt(f);
    const double ratio = efficiency_improvement(p, f);
    const bool ok = within(gbps, 20.48, 0.01) && within(eff, 1.51, 0.01) && within(fpga, 0.93, 0.01) &&
                    within(ratio, 1.62, 0.01);
    return Outcome{ok, fmt(gbps) + " Gbps, " + fmt(eff) + " TOPS/W, FPGA " + fmt(fpga) + " TOPS/W, " + fmt(ratio) +
                           "x"};
  });

  report(8, "protocol impact properties", 120, [] {
    const auto& r = experiment("protocol").json["results"];
    bool far_zero_at_target = false;
    bool monotone = true;
    double last = -1;
    double delta_low = 0, delta_high = 0;
    std::string curve;
    for (const auto& p : r["points"]) {
      const double ber = p["ber"].get<double>();
      const double delta = p["frr_delta"].get<double>();
      monotone = monotone && delta >= last;
      last = delta;
      curve += (curve.empty() ? "" : ", ") + fmt(ber) + ":" + fmt(delta);
      if (ber == 1.6e-5) {
        far_zero_at_target = p["false_accepts"].get<std::uint64_t>() == 0 &&
                             p["impostor_trials"].get<std::uint64_t>() >= 100000;
        delta_low = delta;
      }
      if (ber == 1e-3) delta_high = delta;
    }
    const bool ok = far_zero_at_target && monotone && delta_high > delta_low;
    return Outcome{ok, std::string("FAR at BER 1.6e-5 ") + (far_zero_at_target ? "0" : "NONZERO") +
                           " over 1e5 impostors; FRR delta by BER {" + curve + "} " +
                           (monotone ? "monotone" : "NOT monotone")};
  });

  report(9, "determinism across worker counts", 600, [&] {
    for (const auto name : kExperiments) experiment(std::string(name));
    int same = 0;
    std::string differing;
    for (const auto& [name, pair] : runs) {
      if (comparable(pair.one.json).dump() == comparable(pair.many.json).dump() && pair.one.csv == pair.many.csv) {
        ++same;
      } else {
        differing += " " + name;
      }
    }
    std::string detail = std::to_string(same) + "/" + std::to_string(runs.size()) +
                         " experiments give identical JSON and CSV with 1 and 4 workers";
    bool cli_ok = true;
    if (!cli.empty()) {
      const auto dir = std::filesystem::temp_directory_path();
      for (const std::string exp : {"verify", "protocol"}) {
        std::string outputs[2];
        for (int k = 0; k < 2; ++k) {
          const std::string path = (dir / ("rramcim_acc_" + exp + std::to_string(k) + ".json")).string();
          const std::string cmd = cli + " " + exp + " --trials 5000 --no-timestamp -q --jobs " +
                                  (k ? "3" : "1") + " --out " + path;
          const int status = std::system(cmd.c_str());
          cli_ok = cli_ok && WIFEXITED(status) && WEXITSTATUS(status) == 0;
          outputs[k] = slurp(path);
          std::filesystem::remove(path);
        }
        cli_ok = cli_ok && !outputs[0].empty() && outputs[0] == outputs[1];
      }
      detail += cli_ok ? "; CLI --jobs 1 vs 3 byte-identical" : "; CLI --jobs runs DIFFER";
    }
    if (!differing.empty()) detail += "; differing:" + differing;
    return Outcome{same == static_cast<int>(runs.size()) && runs.size() == kExperiments.size() && cli_ok, detail};
  });

  std::cout << (failures ? "ACCEPTANCE FAILED: " + std::to_string(failures) + " criteria" : std::string("ALL PASS"))
            << std::endl;
  return failures ? 1 : 0;
}
