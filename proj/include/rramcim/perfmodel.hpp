#pragma once

// Throughput / power / efficiency accounting.
//
// Op-counting convention: one operation per MAC bit, i.e. every output bit of
// a rows x input_width BMVM costs input_width ops. The same convention maps
// both the in-memory design (512 x 36 at 40 MHz, 0.487 W -> 1.51 TOPS/W) and
// the FPGA reference (51.2 Gbps x 36 / 1.975 W -> 0.93 TOPS/W).

#include <cmath>

namespace rramcim {

struct PerfParams {
  double rows = 512;
  double input_width = 36;
  double frequency_hz = 40e6;
  double total_power_w = 0.487;
  double pcspc_power_per_row_w = 0.097e-3;
  double ops_per_mac = 1;
};

struct FpgaReference {
  double throughput_bps = 51.2e9;
  double input_width = 36;
  double power_w = 1.975;
  double ops_per_mac = 1;
};

/// One output bit per row per cycle.
inline double throughput_bits_per_sec(const PerfParams& p) { return p.rows * p.frequency_hz; }

inline double ops_per_sec(const PerfParams& p) { return p.rows * p.input_width * p.ops_per_mac * p.frequency_hz; }

inline double energy_efficiency_tops_per_watt(const PerfParams& p) { return ops_per_sec(p) / p.total_power_w / 1e12; }

inline double energy_efficiency_tops_per_watt(const FpgaReference& f) {
  return f.throughput_bps * f.input_width * f.ops_per_mac / f.power_w / 1e12;
}

inline double readout_power_budget(double rows, double pcspc_power_per_row_w) { return rows * pcspc_power_per_row_w; }

inline double readout_power_share(const PerfParams& p) {
  return readout_power_budget(p.rows, p.pcspc_power_per_row_w) / p.total_power_w;
}

inline double efficiency_improvement(const PerfParams& p, const FpgaReference& f) {
  return energy_efficiency_tops_per_watt(p) / energy_efficiency_tops_per_watt(f);
}

} // namespace rramcim
