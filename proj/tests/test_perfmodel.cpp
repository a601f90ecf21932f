#include <gtest/gtest.h>

#include "rramcim/perfmodel.hpp"

using namespace rramcim;

TEST(Perf, Throughput) {
  EXPECT_DOUBLE_EQ(throughput_bits_per_sec(PerfParams{}), 20.48e9);
  PerfParams one;
  one.rows = 1;
  one.frequency_hz = 1;
  EXPECT_DOUBLE_EQ(throughput_bits_per_sec(one), 1.0);
  PerfParams half;
  half.rows = 256;
  EXPECT_DOUBLE_EQ(throughput_bits_per_sec(half), 10.24e9);
}

TEST(Perf, EnergyEfficiency) {
  // 512 * 36 * 4e7 / 0.487 / 1e12
  EXPECT_NEAR(energy_efficiency_tops_per_watt(PerfParams{}), 1.513922, 1e-6);
  // 51.2e9 * 36 / 1.975 / 1e12
  EXPECT_NEAR(energy_efficiency_tops_per_watt(FpgaReference{}), 0.933266, 1e-6);
  EXPECT_NEAR(efficiency_improvement(PerfParams{}, FpgaReference{}), 1.62, 0.01);
}

TEST(Perf, ReadoutBudget) {
  EXPECT_NEAR(readout_power_budget(512, 0.097e-3), 0.049664, 1e-9);
  EXPECT_EQ(readout_power_budget(0, 0.097e-3), 0.0);
  EXPECT_DOUBLE_EQ(readout_power_budget(1, 0.097e-3), 0.097e-3);
  EXPECT_NEAR(readout_power_share(PerfParams{}), 0.102, 0.001);
}

TEST(Perf, LinearInRowsAndFrequency) {
  PerfParams p;
  const double base = energy_efficiency_tops_per_watt(p);
  p.rows *= 2;
  EXPECT_DOUBLE_EQ(energy_efficiency_tops_per_watt(p), 2 * base);
  p.frequency_hz *= 3;
  EXPECT_DOUBLE_EQ(energy_efficiency_tops_per_watt(p), 6 * base);
  EXPECT_DOUBLE_EQ(ops_per_sec(p), 1024 * 36 * 120e6);
}
