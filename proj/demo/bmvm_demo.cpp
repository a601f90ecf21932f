// Maps a random 512x36 binary matrix onto four sub-arrays, computes y = A x
// with the default (non-ideal) device model and compares against software.

#include <iostream>

#include "rramcim/rramcim.hpp"

int main() {
  using namespace rramcim;
  SystemConfig cfg;
  Rng rng = make_stream(42, StreamDomain::Generic, 0);
  const BitMatrix a = BitMatrix::random(512, cfg.input_width(), rng);
  const BitVector x = BitVector::random(cfg.input_width(), rng);

  RunOptions opt;
  opt.record_diagnostics = true;
  const BmvmRun run = run_bmvm(a, x, cfg, rng, opt);
  const BitVector oracle = bmvm_exact(a, x);

  std::cout << "x      = " << x.to_string() << '\n';
  std::cout << "y[0:64] = " << run.y.slice(0, 64).to_string() << '\n';
  std::cout << "oracle  = " << oracle.slice(0, 64).to_string() << '\n';
  std::cout << "mismatched bits: " << (run.y ^ oracle).popcount() << " / " << oracle.size() << '\n';

  std::cout << "row 0 per sub-array:\n";
  for (std::size_t s = 0; s < run.diagnostics[0].size(); ++s) {
    const auto& d = run.diagnostics[0][s];
    std::cout << "  sub " << s << ": I_MC " << d.current_ua << " uA, pulses " << d.trace.ramp_pulse_count
              << ", V " << d.trace.v_charge_at_sample << " V, xor " << d.trace.xor_out << '\n';
  }
}
