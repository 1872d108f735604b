#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "qkd/attack.hpp"
#include "qkd/error.hpp"
#include "qkd/fixtures.hpp"
#include "qkd/statistics.hpp"

using namespace qkd;

TEST(SweepGrid, FullCycleAtFineStep) {
  const auto grid = sweep_grid(1000.0, 4.5);
  ASSERT_EQ(grid.size(), 223u);
  EXPECT_EQ(grid.front(), -499.5);
  EXPECT_EQ(grid.back(), 499.5);
  EXPECT_EQ(grid[111], 0.0);
  EXPECT_EQ(sweep_grid(990.0, 49.5).size(), 21u);
  EXPECT_THROW(sweep_grid(100.0, 0.0), ValidationError);
}

TEST(SweepCharacterization, IndependentOfThreadCount) {
  const auto pair = severe_mismatch_fixture();
  const auto rx = default_receiver();
  const auto grid = sweep_grid(200.0, 4.5);
  const auto one = sweep_characterization(pair, rx, grid, 2000, 7, 1);
  const auto many = sweep_characterization(pair, rx, grid, 2000, 7, 8);
  ASSERT_EQ(one.size(), grid.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].shift_ps, grid[i]);
    EXPECT_EQ(one[i].counts, many[i].counts);
  }
}

TEST(SweepCharacterization, RejectsOffGridShift) {
  const std::vector<double> shifts{1.0};
  EXPECT_THROW(sweep_characterization(severe_mismatch_fixture(), default_receiver(), shifts, 10, 1),
               ValidationError);
}

TEST(SweepCharacterization, MatchedDetectorsShowNoBias) {
  // Under zero expected bias the contrast of S sifted events has standard
  // deviation 1 / sqrt(S); the plug-in sigma degenerates at a handful of counts.
  const auto rx = default_receiver();
  const auto grid = sweep_grid(1000.0, 49.5);
  for (const auto& p : sweep_characterization(matched_fixture(), rx, grid, 200'000, 3)) {
    if (p.counts.sifted == 0) continue;
    const double b = bias_contrast(p.counts);
    const double s = 1.0 / std::sqrt(static_cast<double>(p.counts.sifted));
    EXPECT_LE(std::abs(b), 3.0 * s) << "shift " << p.shift_ps;
  }
}

TEST(OptimizeShiftPair, MatchedDetectorsLeakNothing) {
  const auto grid = sweep_grid(1000.0, 4.5);
  const auto plan = optimize_shift_pair(matched_fixture(), default_receiver(), 0.11, grid);
  ASSERT_TRUE(plan.found);
  EXPECT_EQ(plan.eve_info_bits, 0.0);
}

TEST(OptimizeShiftPair, SevereMismatchTwoStateLeaksUnderCap) {
  const auto pair = severe_mismatch_fixture();
  const auto rx = default_receiver();
  const auto plan = optimize_shift_pair(pair, rx, 0.11, sweep_grid(1000.0, 4.5));
  ASSERT_TRUE(plan.found);
  EXPECT_GT(plan.eve_info_bits, 0.1);
  EXPECT_LE(plan.predicted_qber, 0.11);
  const auto eve = EveStrategy::two_point(plan.t1_ps, plan.t2_ps, plan.p1);
  EXPECT_NEAR(eve_information(pair, rx, eve), plan.eve_info_bits, 1e-12);
  EXPECT_NEAR(predicted_qber(pair, rx, eve), plan.predicted_qber, 1e-12);
  EXPECT_LT(plan.t1_ps, plan.t2_ps);
}

TEST(OptimizeShiftPair, FourStateLeaksNothing) {
  const auto plan = optimize_shift_pair(severe_mismatch_fixture(), default_receiver(DemodulationMode::FourState),
                                        0.11, sweep_grid(1000.0, 4.5));
  ASSERT_TRUE(plan.found);
  EXPECT_LT(plan.eve_info_bits, 1e-3);
}

TEST(OptimizeShiftPair, CapIsBindingOnEveryCap) {
  const auto pair = severe_mismatch_fixture();
  const auto rx = default_receiver();
  const auto grid = sweep_grid(1000.0, 9.0);
  double previous = 0.0;
  for (double cap : {0.035, 0.05, 0.07, 0.09, 0.11, 0.2}) {
    const auto plan = optimize_shift_pair(pair, rx, cap, grid);
    ASSERT_TRUE(plan.found);
    EXPECT_LE(plan.predicted_qber, cap);
    EXPECT_GE(plan.eve_info_bits, previous - 1e-12);
    previous = plan.eve_info_bits;
  }
}

TEST(OptimizeShiftPair, EmptyFeasibleSetMeansNoAttack) {
  // The baseline QBER is 0.03, so a 0.02 cap excludes every strategy.
  const auto plan = optimize_shift_pair(severe_mismatch_fixture(), default_receiver(), 0.02,
                                        sweep_grid(1000.0, 49.5));
  EXPECT_FALSE(plan.found);
  EXPECT_THROW(optimize_shift_pair(matched_fixture(), default_receiver(), 0.6, sweep_grid(100.0, 4.5)),
               ValidationError);
}

TEST(OptimizeShiftPair, TiesGoToSmallestShifts) {
  // Every strategy leaks nothing on matched curves, so the plan must be the
  // first feasible candidate in (t1, t2, p1) order, found here by brute force.
  const auto pair = matched_fixture();
  const auto rx = default_receiver();
  const auto grid = sweep_grid(1000.0, 49.5);
  const auto plan = optimize_shift_pair(pair, rx, 0.11, grid);
  ASSERT_TRUE(plan.found);
  EXPECT_EQ(plan.eve_info_bits, 0.0);

  bool done = false;
  for (std::size_t i = 0; i < grid.size() && !done; ++i) {
    const auto a = expected_outcome(pair, rx, grid[i]);
    if (a.qber() <= 0.11) {
      EXPECT_EQ(plan.t1_ps, grid[i]);
      EXPECT_EQ(plan.t2_ps, grid[i]);
      done = true;
      break;
    }
    for (std::size_t j = i + 1; j < grid.size() && !done; ++j) {
      const auto b = expected_outcome(pair, rx, grid[j]);
      std::vector<double> p1s = default_p1_grid();
      p1s.push_back(b.sifted / (a.sifted + b.sifted));
      std::sort(p1s.begin(), p1s.end());
      for (double p1 : p1s) {
        const double q = (p1 * a.errors + (1 - p1) * b.errors) / (p1 * a.sifted + (1 - p1) * b.sifted);
        if (q <= 0.11) {
          EXPECT_EQ(plan.t1_ps, grid[i]);
          EXPECT_EQ(plan.t2_ps, grid[j]);
          EXPECT_EQ(plan.p1, p1);
          done = true;
          break;
        }
      }
    }
  }
  EXPECT_TRUE(done);
}
