#include "pourlab/reward.hpp"

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <gtest/gtest.h>

#include "pourlab/error.hpp"

namespace pourlab::reward {
namespace {

using Wide = boost::multiprecision::cpp_dec_float_50;

double wide_reward(const RewardWeights& w, const RewardInputs& in) {
  const Wide value = boost::multiprecision::exp(-Wide(in.elapsed) / Wide(w.w_t)) * Wide(w.w_a) *
                         Wide(in.accuracy) -
                     Wide(w.w_e) * Wide(in.effort);
  return value.convert_to<double>();
}

TEST(ComputeReward, ZeroAccuracyAndEffortGiveZero) {
  for (double t : {0.0, 0.5, 7.0}) {
    EXPECT_EQ(compute_reward({1.0, 4.0, 0.2}, {0.0, t, 0.0}), 0.0);
    EXPECT_EQ(compute_reward({3.0, 0.5, 9.0}, {0.0, t, 0.0}), 0.0);
  }
}

TEST(ComputeReward, FullAccuracyAtTimeZeroIsOne) {
  EXPECT_EQ(compute_reward({1.0, 0.7, 1.0}, {1.0, 0.0, 0.0}), 1.0);
}

TEST(ComputeReward, HandExample) {
  const double r = compute_reward({2.0, 4.0, 1.0}, {0.5, 2.0, 0.1});
  EXPECT_NEAR(r, 0.50653065971263342, 1e-15);
  EXPECT_NEAR(r, wide_reward({2.0, 4.0, 1.0}, {0.5, 2.0, 0.1}), 1e-15);
}

TEST(ComputeReward, NonFiniteInputIsANumericError) {
  EXPECT_THROW(compute_reward({1.0, 4.0, 0.2}, {NAN, 0.0, 0.0}), NumericError);
  EXPECT_THROW(compute_reward({1.0, 4.0, 0.2}, {0.5, INFINITY, 0.0}), NumericError);
  EXPECT_THROW(compute_reward({1.0, 4.0, 0.2}, {0.5, 1.0, -INFINITY}), NumericError);
}

// Property: strictly monotone in each input over random valid draws.
TEST(ComputeReward, MonotoneInEachInput) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const RewardWeights w{0.1 + 2.0 * unit(gen), 0.2 + 8.0 * unit(gen), 0.01 + unit(gen)};
    // Keep t / w_t moderate so the discount stays well above rounding.
    const RewardInputs in{0.05 + 0.9 * unit(gen), 5.0 * w.w_t * unit(gen), unit(gen)};
    const double r = compute_reward(w, in);
    RewardInputs more = in;
    more.accuracy += 0.01;
    EXPECT_GT(compute_reward(w, more), r);
    more = in;
    more.effort += 0.01;
    EXPECT_LT(compute_reward(w, more), r);
    more = in;
    more.elapsed += 0.1;
    EXPECT_LT(compute_reward(w, more), r);
  }
}

TEST(ComputeReward, MatchesWidePrecisionOnRandomInputs) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const RewardWeights w{0.1 + 2.0 * unit(gen), 0.1 + 10.0 * unit(gen), unit(gen)};
    const RewardInputs in{unit(gen), 10.0 * unit(gen), 2.0 * unit(gen)};
    const double expected = wide_reward(w, in);
    const double got = compute_reward(w, in);
    EXPECT_LE(std::abs(got - expected), 1e-12 * std::max(std::abs(expected), 1e-300));
  }
}

TEST(MutateWeight, TinySigmaReturnsNearlyTheBase) {
  std::mt19937_64 rng(1);
  EXPECT_NEAR(mutate_weight(4.0, 1e-12, WeightKind::kTime, rng), 4.0, 1e-10);
}

TEST(MutateWeight, NonPositiveSigmaIsAConfigError) {
  std::mt19937_64 rng(1);
  EXPECT_THROW(mutate_weight(4.0, 0.0, WeightKind::kTime, rng), ConfigError);
  EXPECT_THROW(mutate_weight(4.0, -1.0, WeightKind::kEffort, rng), ConfigError);
}

TEST(MutateWeight, SameSeedSameSample) {
  std::mt19937_64 a(99), b(99);
  EXPECT_EQ(mutate_weight(4.0, 1.0, WeightKind::kTime, a),
            mutate_weight(4.0, 1.0, WeightKind::kTime, b));
}

TEST(MutateWeight, ResamplesIntoTheValidRange) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    EXPECT_GT(mutate_weight(0.1, 1.0, WeightKind::kTime, rng), 0.0);
    EXPECT_GE(mutate_weight(0.0, 0.05, WeightKind::kEffort, rng), 0.0);
  }
}

// Sample moments against the normal's, with a 4-sigma band on the mean and on
// the sample variance (sd of s^2 is sigma^2 sqrt(2 / (n - 1))).
TEST(MutateWeight, SampleMomentsMatchTheNormal) {
  constexpr int n = 10'000;
  for (std::uint64_t seed : {1, 2, 3}) {
    std::mt19937_64 rng(seed);
    std::vector<double> s(n);
    for (double& x : s) x = mutate_weight(6.0, 1.0, WeightKind::kTime, rng);
    double mean = 0.0;
    for (double x : s) mean += x / n;
    double var = 0.0;
    for (double x : s) var += (x - mean) * (x - mean) / (n - 1);
    EXPECT_NEAR(mean, 6.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(var, 1.0, 4.0 * std::sqrt(2.0 / (n - 1)));
  }
}

TEST(MutateWeights, KeepsAccuracyWeight) {
  std::mt19937_64 rng(8);
  const RewardWeights base;
  for (int i = 0; i < 100; ++i) {
    const RewardWeights w = mutate_weights(base, {}, rng);
    EXPECT_EQ(w.w_a, base.w_a);
    EXPECT_NO_THROW(validate(w));
  }
}

TEST(WeightGrid, DefaultGridIsTheDeclaredProduct) {
  const auto grid = build_weight_grid({1.0, 4.0, 0.2}, {});
  ASSERT_EQ(grid.size(), 25u);
  const double wt[] = {2.0, 3.0, 4.0, 5.0, 6.0};
  const double we[] = {0.1, 0.15, 0.2, 0.25, 0.3};
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      EXPECT_EQ(grid[i * 5 + j], (RewardWeights{1.0, wt[i], we[j]})) << i << "," << j;
    }
  }
  EXPECT_EQ(baseline_cell({}), 12);
  EXPECT_EQ(grid[12], (RewardWeights{1.0, 4.0, 0.2}));
}

TEST(WeightGrid, ClampsToTheValidRange) {
  MutationSpec spec;
  spec.sigma_t = 3.0;
  spec.sigma_e = 0.5;
  const auto grid = build_weight_grid({1.0, 4.0, 0.2}, spec);
  for (const RewardWeights& w : grid) {
    EXPECT_GE(w.w_t, 0.4);
    EXPECT_GE(w.w_e, 0.0);
  }
  EXPECT_EQ(grid[0].w_t, 0.4);
  EXPECT_EQ(grid[0].w_e, 0.0);
}

TEST(WeightGrid, RejectsSpecsWithoutZeroOffset) {
  MutationSpec spec;
  spec.grid_offsets = {-1.0, 1.0};
  EXPECT_THROW(build_weight_grid({}, spec), ConfigError);
  spec.grid_offsets = {1.0, 0.0};
  EXPECT_THROW(build_weight_grid({}, spec), ConfigError);
}

// Property: for random bases and sigmas the grid is pure, duplicate-free,
// valid and holds the base exactly once.
TEST(WeightGrid, RandomSpecsKeepGridInvariants) {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    MutationSpec spec;
    spec.sigma_t = 0.01 + 0.3 * unit(gen);
    spec.sigma_e = 0.001 + 0.02 * unit(gen);
    // Bases stay clear of the clamps, which would merge neighbouring cells.
    const RewardWeights base{0.5 + unit(gen), 1.0 + 9.0 * unit(gen),
                             2.0 * spec.sigma_e + 0.5 * unit(gen)};
    const auto grid = build_weight_grid(base, spec);
    EXPECT_EQ(grid, build_weight_grid(base, spec));
    ASSERT_EQ(grid.size(), 25u);
    std::set<std::pair<double, double>> unique;
    int base_hits = 0;
    for (const RewardWeights& w : grid) {
      EXPECT_NO_THROW(validate(w));
      EXPECT_EQ(w.w_a, base.w_a);
      unique.insert({w.w_t, w.w_e});
      if (w == base) ++base_hits;
    }
    EXPECT_EQ(unique.size(), 25u);
    EXPECT_EQ(base_hits, 1);
    EXPECT_EQ(grid[baseline_cell(spec)], base);
  }
}

TEST(PerStepReward, NoLandingNoEffortIsNonPositive) {
  const RewardWeights w{1.0, 4.0, 0.2};
  EXPECT_LE(per_step_reward(w, {0.3, 1.0, 0.0}, {0.3, 1.01, 0.0}), 0.0);
  EXPECT_EQ(per_step_reward(w, {0.0, 1.0, 0.0}, {0.0, 1.01, 0.0}), 0.0);
}

TEST(PerStepReward, FrozenAccuracyAtTimeZeroLeavesOnlyEffort) {
  const RewardWeights w{1.0, 4.0, 0.2};
  EXPECT_DOUBLE_EQ(per_step_reward(w, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.5}), -0.1);
}

TEST(PerStepReward, ThreeStepTraceTelescopes) {
  const RewardWeights w{2.0, 4.0, 0.2};
  // Accuracy 0, 0.25, 0.6, 0.6 at t = 0, 1, 2, 3 with zero effort.
  const RewardInputs s0{0.0, 0.0, 0.0}, s1{0.25, 1.0, 0.0}, s2{0.6, 2.0, 0.0}, s3{0.6, 3.0, 0.0};
  const double sum = per_step_reward(w, s0, s1) + per_step_reward(w, s1, s2) +
                     per_step_reward(w, s2, s3);
  // By hand: 2 * 0.6 * exp(-3/4) = 0.56683986...
  EXPECT_NEAR(sum, 0.56683986328921763, 1e-15);
  EXPECT_NEAR(sum, compute_reward(w, s3), 1e-15);
}

// Property: random zero-effort episodes telescope to the terminal reward.
TEST(PerStepReward, RandomEpisodesTelescope) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const RewardWeights w{0.5 + unit(gen), 0.5 + 8.0 * unit(gen), unit(gen)};
    const int steps = 10 + static_cast<int>(500 * unit(gen));
    RewardInputs previous{0.0, 0.0, 0.0};
    double sum = 0.0;
    for (int k = 1; k <= steps; ++k) {
      RewardInputs current{std::min(1.0, previous.accuracy + 0.01 * unit(gen)), 0.01 * k, 0.0};
      sum += per_step_reward(w, previous, current);
      previous = current;
    }
    const double terminal = compute_reward(w, previous);
    EXPECT_NEAR(sum, terminal, 1e-9 * std::max(1.0, std::abs(terminal)));
  }
}

}  // namespace
}  // namespace pourlab::reward
