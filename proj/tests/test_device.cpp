#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "rramcim/device.hpp"
#include "rramcim/rng.hpp"

using namespace rramcim;

TEST(Device, LrsMeanWithinOnePercentAndSpreadBelowTwo) {
  const ResistanceModel model;
  Rng rng = make_stream(1, StreamDomain::Generic, 0);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = sample_resistance(model, ResistanceState::LRS, rng).resistance_ohm;
    sum += r;
    sum2 += r * r;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  EXPECT_NEAR(mean, 6000.0, 60.0);
  EXPECT_LT(sd / mean, 0.02);
}

TEST(Device, HrsNeverBelowFloorAndSpreadIsTensOfKiloOhm) {
  const ResistanceModel model;
  Rng rng = make_stream(2, StreamDomain::Generic, 0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const auto d = sample_resistance(model, ResistanceState::HRS, rng);
    ASSERT_EQ(d.state, ResistanceState::HRS);
    lo = std::min(lo, d.resistance_ohm);
    hi = std::max(hi, d.resistance_ohm);
  }
  EXPECT_GE(lo, model.hrs_floor_ohm);
  EXPECT_GT(hi - lo, 20000.0);
  EXPECT_LT(hi - lo, 100000.0);
}

TEST(Device, ZeroSigmaReturnsMeanExactly) {
  ResistanceModel model;
  model.lrs_sigma_ohm = 0.0;
  model.hrs_sigma_ohm = 0.0;
  Rng rng = make_stream(3, StreamDomain::Generic, 0);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(sample_resistance(model, ResistanceState::LRS, rng).resistance_ohm, 6000.0);
    ASSERT_EQ(sample_resistance(model, ResistanceState::HRS, rng).resistance_ohm, 70000.0);
  }
}

TEST(Device, FaultProbabilityEndpoints) {
  ResistanceModel model;
  Rng rng = make_stream(4, StreamDomain::Generic, 0);
  model.yield_fault_prob = 0.0;
  for (int i = 0; i < 10000; ++i) ASSERT_EQ(sample_fault(model, rng), DeviceFault::None);
  model.yield_fault_prob = 1.0;
  for (int i = 0; i < 10000; ++i) ASSERT_EQ(sample_fault(model, rng), DeviceFault::StuckFault);
}

TEST(Device, FaultFractionMatchesProbability) {
  ResistanceModel model;
  model.yield_fault_prob = 0.01;
  Rng rng = make_stream(5, StreamDomain::Generic, 0);
  int faults = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) faults += sample_fault(model, rng) == DeviceFault::StuckFault;
  EXPECT_NEAR(static_cast<double>(faults) / n, 0.01, 0.001);
}

TEST(Device, SameSeedSameStream) {
  const ResistanceModel model;
  Rng a = make_stream(77, StreamDomain::Deploy, 3);
  Rng b = make_stream(77, StreamDomain::Deploy, 3);
  Rng c = make_stream(77, StreamDomain::Deploy, 4);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double ra = program_device(model, ResistanceState::HRS, a).resistance_ohm;
    ASSERT_EQ(ra, program_device(model, ResistanceState::HRS, b).resistance_ohm);
    differs |= ra != program_device(model, ResistanceState::HRS, c).resistance_ohm;
  }
  EXPECT_TRUE(differs);
}

TEST(Device, ReadJitterOffByDefault) {
  const ResistanceModel model;
  Rng rng = make_stream(6, StreamDomain::Generic, 0);
  const auto d = program_device(model, ResistanceState::LRS, rng);
  EXPECT_EQ(read_device(d, model, rng).resistance_ohm, d.resistance_ohm);

  ResistanceModel noisy = model;
  noisy.read_noise_rel = 0.05;
  bool moved = false;
  for (int i = 0; i < 100; ++i) {
    const double r = read_device(d, noisy, rng).resistance_ohm;
    ASSERT_GE(r, noisy.lrs_floor_ohm);
    moved |= r != d.resistance_ohm;
  }
  EXPECT_TRUE(moved);
}

TEST(Device, ValidateRejectsBadModels) {
  EXPECT_NO_THROW(ResistanceModel{}.validate());
  ResistanceModel m;
  m.lrs_sigma_ohm = -1;
  EXPECT_THROW(m.validate(), ConfigError);
  m = {};
  m.yield_fault_prob = 1.5;
  EXPECT_THROW(m.validate(), ConfigError);
  m = {};
  m.hrs_floor_ohm = 5000; // below the LRS mean
  EXPECT_THROW(m.validate(), ConfigError);
  m = {};
  m.hrs_mean_ohm = std::nan("");
  EXPECT_THROW(m.validate(), ConfigError);
}
