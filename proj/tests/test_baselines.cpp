#include "ocafs/baselines.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace ocafs;
using ocafs::testing::random_landscape;
using ocafs::testing::small_config;

namespace {

bool is_flip_local_optimum(const SubsetScorer::ScoreFn& fn, const FeatureMask& m) {
    auto value = [&](const FeatureMask& x) { return x.empty_selection() ? 0.0 : fn(x); };
    const double here = value(m);
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto c = flip(m, i);
        const double s = value(c);
        if (s > here || (s == here && c.popcount() < m.popcount())) return false;
    }
    return true;
}

SplitDataset small_split(std::uint64_t seed, std::size_t rows = 300) {
    return split(generate_synthetic(small_config({4, 4}, 3, rows, 2, 1, 0.8, seed)), 0.7, seed);
}

// Independent replay of recursive elimination with step 1: refit on the
// survivors, drop the lowest-importance survivor (lowest index on ties).
std::vector<std::size_t> rfe_replay(const SplitDataset& s, const GbmConfig& gbm, std::size_t target) {
    FeatureMask mask = FeatureMask::all(s.train.cols());
    std::vector<std::size_t> order;
    while (mask.popcount() > target) {
        const auto model = fit(s.train, mask, gbm);
        const auto r = importances(model, s.train.spec());
        std::size_t worst = s.train.cols();
        for (std::size_t f = 0; f < mask.size(); ++f) {
            if (!mask.test(f)) continue;
            if (worst == s.train.cols() || r.importance[f] < r.importance[worst]) worst = f;
        }
        mask.set(worst, false);
        order.push_back(worst);
    }
    return order;
}

}  // namespace

TEST(Bca, AllOnesAlreadyOptimal) {
    SubsetScorer scorer(6, [](const FeatureMask& m) { return m.popcount() == 6 ? 0.9 : 0.5; });
    const auto out = run_bca(scorer, 1e-6, 50);
    EXPECT_EQ(out.mask, FeatureMask::all(6));
    EXPECT_EQ(out.sweeps, 1u);
    // The incumbent fit plus one per flipped candidate.
    EXPECT_EQ(out.evaluations, 7u);
    EXPECT_EQ(out.method, "bca");
}

TEST(Bca, ReachesFlipLocalOptimumOnEnumeratedLandscapes) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto fn = random_landscape(300 + seed, 6);
        SubsetScorer scorer(10, fn);
        const auto out = run_bca(scorer, 0.0, 1000);
        ASSERT_EQ(out.stop_reason, StopReason::converged);
        EXPECT_TRUE(is_flip_local_optimum(fn, out.mask));
        double last = -1.0;
        for (const auto& e : out.trace) {
            if (!e.accepted) continue;
            EXPECT_GE(e.score, last);
            last = e.score;
        }
    }
}

TEST(Rfe, TargetEqualToNKeepsEverything) {
    const auto s = small_split(1);
    const auto out = run_rfe(s, GbmConfig{}, {s.train.cols(), 1});
    EXPECT_EQ(out.mask, FeatureMask::all(s.train.cols()));
    EXPECT_EQ(out.evaluations, 1u);
    EXPECT_TRUE(out.elimination_order.empty());
}

TEST(Rfe, MatchesIndependentReplay) {
    const auto cfg = small_config({3}, 2, 300, 1, 1, 0.8, 5);
    const auto s = split(generate_synthetic(cfg), 0.7, 5);
    for (std::size_t target = 1; target <= 5; ++target) {
        const auto out = run_rfe(s, GbmConfig{}, {target, 1});
        EXPECT_EQ(out.elimination_order, rfe_replay(s, GbmConfig{}, target));
        EXPECT_EQ(out.mask.popcount(), target);
        EXPECT_EQ(out.score, score(fit(s.train, out.mask, GbmConfig{}), s.test, out.mask));
    }
}

TEST(Rfe, PlantedFeatureSurvives) {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto cfg = small_config({4, 4}, 4, 400, 0, 1, 0.3, seed);
        const auto s = split(generate_synthetic(cfg), 0.7, seed);
        const auto out = run_rfe(s, GbmConfig{}, {3, 2});
        hits += out.mask.test(informative_features(cfg).front()) ? 1 : 0;
    }
    EXPECT_GE(hits, 9);
}

TEST(Rfe, FitCountFollowsStep) {
    const auto s = small_split(2);
    const std::size_t n = s.train.cols();
    for (std::size_t step : {1u, 2u, 3u, 5u}) {
        for (std::size_t target : {1u, 4u, 10u}) {
            const auto out = run_rfe(s, GbmConfig{}, {target, step});
            const auto rounds = (n - target + step - 1) / step;
            EXPECT_EQ(out.evaluations, rounds + 1) << "step " << step << " target " << target;
            EXPECT_EQ(out.mask.popcount(), target);
            EXPECT_EQ(out.elimination_order.size(), n - target);
        }
    }
}

TEST(Rfe, SmallerTargetsGiveNestedMasks) {
    const auto s = small_split(3);
    FeatureMask prev = FeatureMask::all(s.train.cols());
    for (std::size_t target = s.train.cols(); target >= 1; --target) {
        const auto out = run_rfe(s, GbmConfig{}, {target, 1});
        for (std::size_t i = 0; i < out.mask.size(); ++i)
            if (out.mask.test(i)) { EXPECT_TRUE(prev.test(i)); }
        prev = out.mask;
    }
}

TEST(Rfe, Validation) {
    const auto s = small_split(4);
    EXPECT_THROW(run_rfe(s, GbmConfig{}, {0, 1}), std::invalid_argument);
    EXPECT_THROW(run_rfe(s, GbmConfig{}, {s.train.cols() + 1, 1}), std::invalid_argument);
    EXPECT_THROW(run_rfe(s, GbmConfig{}, {3, 0}), std::invalid_argument);
}

TEST(RfeSweep, ReusesOnePassAndMatchesSingleRuns) {
    const auto s = small_split(6);
    const std::vector<std::size_t> targets{9, 6, 3};
    const auto sweep = rfe_sweep(s, GbmConfig{}, targets);
    ASSERT_EQ(sweep.size(), 3u);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        EXPECT_EQ(sweep[i].first, targets[i]);
        const auto single = run_rfe(s, GbmConfig{}, {targets[i], 1});
        EXPECT_EQ(sweep[i].second.mask, single.mask);
        EXPECT_EQ(sweep[i].second.score, single.score);
    }
    EXPECT_THROW(rfe_sweep(s, GbmConfig{}, {3, 6}), std::invalid_argument);
    EXPECT_TRUE(rfe_sweep(s, GbmConfig{}, {}).empty());
}

TEST(RfeSweep, LargerStepRunsEachTarget) {
    const auto s = small_split(7);
    const auto sweep = rfe_sweep(s, GbmConfig{}, {8, 4}, 3);
    ASSERT_EQ(sweep.size(), 2u);
    EXPECT_EQ(sweep[0].second.mask, run_rfe(s, GbmConfig{}, {8, 3}).mask);
    EXPECT_EQ(sweep[1].second.mask.popcount(), 4u);
}
