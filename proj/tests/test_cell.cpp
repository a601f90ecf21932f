#include <gtest/gtest.h>

#include "rramcim/cell.hpp"
#include "rramcim/device.hpp"
#include "rramcim/rng.hpp"

using namespace rramcim;

namespace {
DeviceSample dev(double r, ResistanceState s, DeviceFault f = DeviceFault::None) { return {r, s, f}; }
} // namespace

TEST(Cell, InputZeroConductsNothing) {
  const CellParams p;
  const ResistanceModel m;
  for (auto v : {CellVariant::Compensated, CellVariant::Baseline1T1R}) {
    EXPECT_EQ(unit_current(false, dev(6000, ResistanceState::LRS), p, m, v), 0.0);
    EXPECT_EQ(unit_current(false, dev(70000, ResistanceState::HRS), p, m, v), 0.0);
    EXPECT_EQ(unit_current(false, dev(6000, ResistanceState::LRS, DeviceFault::StuckFault), p, m, v), 0.0);
  }
}

TEST(Cell, NominalLrsGivesUnitCurrent) {
  EXPECT_DOUBLE_EQ(unit_current(true, dev(6000, ResistanceState::LRS), CellParams{}, ResistanceModel{},
                                CellVariant::Compensated),
                   4.0);
}

TEST(Cell, StuckDeviceGivesStuckCurrent) {
  CellParams p;
  p.stuck_current_ua = 3.5;
  EXPECT_EQ(unit_current(true, dev(70000, ResistanceState::HRS, DeviceFault::StuckFault), p, ResistanceModel{},
                         CellVariant::Compensated),
            3.5);
}

TEST(Cell, MeanHrsLeakageNearUnitOverTarget) {
  const CellParams p;
  const ResistanceModel m;
  Rng rng = make_stream(1, StreamDomain::Generic, 0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    sum += unit_current(true, sample_resistance(m, ResistanceState::HRS, rng), p, m, CellVariant::Compensated);
  }
  // E[1/R] > 1/E[R], so the mean sits a little above 4/51.9 = 0.0771.
  EXPECT_NEAR(sum / n, 4.0 / 51.9, 0.05 * 4.0 / 51.9);
}

TEST(Cell, RRatioTargets) {
  const CellParams p;
  const ResistanceModel m;
  Rng a = make_stream(2, StreamDomain::RRatio, 0);
  Rng b = make_stream(2, StreamDomain::RRatio, 1);
  const double comp = effective_r_ratio(CellVariant::Compensated, p, m, 100000, a);
  const double base = effective_r_ratio(CellVariant::Baseline1T1R, p, m, 100000, b);
  EXPECT_NEAR(comp, 51.9, 0.05 * 51.9);
  EXPECT_NEAR(base, 10.38, 0.10 * 10.38);
  EXPECT_NEAR(comp / base, 5.0, 0.5);
}

TEST(Cell, ZeroVarianceGivesExactTarget) {
  const CellParams p;
  ResistanceModel m;
  m.lrs_sigma_ohm = 0;
  m.hrs_sigma_ohm = 0;
  Rng rng = make_stream(3, StreamDomain::Generic, 0);
  EXPECT_NEAR(effective_r_ratio(CellVariant::Compensated, p, m, 10000, rng), 51.9, 1e-9);
  EXPECT_NEAR(effective_r_ratio(CellVariant::Baseline1T1R, p, m, 10000, rng), 51.9 / 5, 1e-9);
}

TEST(Cell, TooFewTrialsRejected) {
  Rng rng = make_stream(3, StreamDomain::Generic, 0);
  EXPECT_THROW(effective_r_ratio(CellVariant::Compensated, CellParams{}, ResistanceModel{}, 100, rng),
               std::invalid_argument);
}

TEST(Cell, CurrentFallsWithResistance) {
  const CellParams p;
  const ResistanceModel m;
  for (auto v : {CellVariant::Compensated, CellVariant::Baseline1T1R}) {
    for (double r = 5000; r < 7000; r += 100) {
      EXPECT_GT(unit_current(true, dev(r, ResistanceState::LRS), p, m, v),
                unit_current(true, dev(r + 100, ResistanceState::LRS), p, m, v));
    }
    for (double r = 40000; r < 120000; r += 1000) {
      EXPECT_GT(unit_current(true, dev(r, ResistanceState::HRS), p, m, v),
                unit_current(true, dev(r + 1000, ResistanceState::HRS), p, m, v));
    }
  }
}

TEST(Cell, CompensatedLeaksLessThanBaseline) {
  const CellParams p;
  const ResistanceModel m;
  Rng rng = make_stream(4, StreamDomain::Generic, 0);
  for (int i = 0; i < 10000; ++i) {
    const auto d = sample_resistance(m, ResistanceState::HRS, rng);
    ASSERT_LT(unit_current(true, d, p, m, CellVariant::Compensated),
              unit_current(true, d, p, m, CellVariant::Baseline1T1R));
  }
}
