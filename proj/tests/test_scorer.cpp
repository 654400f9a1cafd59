#include "ocafs/dataset.hpp"
#include "ocafs/scorer.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

using namespace ocafs;
using ocafs::testing::small_config;

namespace {

// Model with no trees whose margin is `base` everywhere.
FittedModel constant_model(double base, std::size_t features) {
    FittedModel m;
    m.base_score = base;
    m.feature_count = features;
    m.mask = FeatureMask::all(features);
    return m;
}

Dataset constant_labels(std::size_t rows, std::uint8_t y) {
    BlockSpec spec = BlockSpec::from_lengths(std::vector<int>{2}, 0);
    return Dataset(spec, std::vector<double>(rows * 2, 0.5), std::vector<std::uint8_t>(rows, y));
}

}  // namespace

TEST(Gini, BalancedAndPureNodes) {
    const std::vector<double> half{0.5, 0.5};
    const std::vector<double> pure{1.0, 0.0};
    EXPECT_DOUBLE_EQ(gini_impurity(half), 0.5);
    EXPECT_DOUBLE_EQ(gini_impurity(pure), 0.0);
}

TEST(GbmConfig, Validation) {
    EXPECT_NO_THROW(GbmConfig{}.validate());
    EXPECT_THROW((GbmConfig{0, 3, 0.1, 5, 0}.validate()), std::invalid_argument);
    EXPECT_THROW((GbmConfig{10, 0, 0.1, 5, 0}.validate()), std::invalid_argument);
    EXPECT_THROW((GbmConfig{10, 3, 0.0, 5, 0}.validate()), std::invalid_argument);
    EXPECT_THROW((GbmConfig{10, 3, 1.5, 5, 0}.validate()), std::invalid_argument);
    EXPECT_THROW((GbmConfig{10, 3, 0.1, 0, 0}.validate()), std::invalid_argument);
}

TEST(TrainingFrame, BinsAgreeWithThresholds) {
    const Dataset ds = generate_synthetic(small_config({3}, 1, 700, 1, 1, 0.5, 3));
    const TrainingFrame frame(ds, 32);
    for (std::size_t f = 0; f < ds.cols(); ++f) {
        const auto& cuts = frame.cuts(f);
        EXPECT_LE(frame.bin_count(f), 32u);
        EXPECT_TRUE(std::is_sorted(cuts.begin(), cuts.end()));
        for (std::size_t r = 0; r < ds.rows(); ++r) {
            const auto b = frame.bins(f)[r];
            if (b < cuts.size()) { EXPECT_LE(ds.at(r, f), cuts[b]); }
            if (b > 0) { EXPECT_GT(ds.at(r, f), cuts[b - 1]); }
        }
    }
}

TEST(Fit, SeparableSingleFeatureReachesPerfectTrainAccuracy) {
    const auto cfg = small_config({4, 4}, 3, 300, 0, 1, 0.0, 21);
    const Dataset ds = generate_synthetic(cfg);
    const auto mask = FeatureMask::from_indices(ds.cols(), informative_features(cfg));
    const auto model = fit(ds, mask, GbmConfig{});
    EXPECT_EQ(score(model, ds, mask), 1.0);
}

TEST(Fit, PureNoiseFeatureStumpIsNearChance) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto cfg = small_config({2}, 2, 400, 0, 1, 0.5, seed);
        const Dataset ds = generate_synthetic(cfg);
        const auto s = split(ds, 0.7, seed);
        // Feature 0 belongs to a block with no informative columns.
        const auto mask = FeatureMask::from_indices(ds.cols(), {0});
        const auto model = fit(s.train, mask, GbmConfig{1, 1, 0.1, 5, seed});
        total += score(model, s.test, mask);
    }
    const double mean = total / 20.0;
    EXPECT_NEAR(mean, 0.5, 0.1);
}

TEST(Fit, IsDeterministic) {
    const Dataset ds = generate_synthetic(small_config({5, 5}, 2, 300, 2, 1, 0.5, 8));
    const auto mask = FeatureMask::all(ds.cols());
    EXPECT_EQ(model_to_json(fit(ds, mask, GbmConfig{})), model_to_json(fit(ds, mask, GbmConfig{})));
}

TEST(Fit, NeverSplitsOnMaskedOutFeaturesAndRespectsDepth) {
    const Dataset ds = generate_synthetic(small_config({6, 6}, 3, 300, 2, 2, 0.5, 13));
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 15; ++trial) {
        FeatureMask mask(ds.cols());
        for (std::size_t i = 0; i < ds.cols(); ++i) mask.set(i, rng() % 3 == 0);
        if (mask.empty_selection()) mask.set(0, true);
        const int depth = 1 + trial % 4;
        const auto model = fit(ds, mask, GbmConfig{10, depth, 0.2, 3, 0});
        for (const auto& tree : model.trees) {
            EXPECT_LE(tree.depth(), depth);
            for (const auto& node : tree.nodes) {
                if (node.is_leaf()) continue;
                ASSERT_LT(static_cast<std::size_t>(node.feature), model.feature_count);
                EXPECT_TRUE(mask.test(static_cast<std::size_t>(node.feature)));
            }
        }
    }
}

TEST(Fit, RejectsEmptyMaskAndSingleClass) {
    const Dataset ds = generate_synthetic(small_config({3}, 1, 100, 1, 1, 0.5, 1));
    EXPECT_THROW(fit(ds, FeatureMask::none(ds.cols()), GbmConfig{}), std::invalid_argument);
    const Dataset ones = constant_labels(50, 1);
    EXPECT_THROW(fit(ones, FeatureMask::all(2), GbmConfig{}), std::invalid_argument);
}

TEST(Score, ConstantPredictions) {
    const auto model = constant_model(5.0, 2);
    EXPECT_EQ(score(model, constant_labels(30, 1), model.mask), 1.0);
    EXPECT_EQ(score(model, constant_labels(30, 0), model.mask), 0.0);
}

TEST(Score, MaskMismatchIsRejected) {
    const auto model = constant_model(5.0, 2);
    EXPECT_THROW(score(model, constant_labels(30, 1), FeatureMask::from_indices(2, {0})), std::invalid_argument);
}

TEST(Importances, SingleSplitConcentratesOnItsFeature) {
    FittedModel model = constant_model(0.0, 6);
    RegressionTree tree;
    tree.nodes.resize(3);
    tree.nodes[0] = {3, 0.5, 1, 2, 0.0, 7.25, 100};
    tree.nodes[1].value = -1.0;
    tree.nodes[2].value = 1.0;
    model.trees.push_back(tree);
    const auto spec = BlockSpec::from_lengths(std::vector<int>{4}, 2);
    const auto r = importances(model, spec);
    EXPECT_EQ(r.importance, (std::vector<double>{0, 0, 0, 1, 0, 0}));
    EXPECT_EQ(r.per_block_order[0], (std::vector<std::size_t>{3, 0, 1, 2}));
}

TEST(Importances, NoSplitsGivesZerosAndIdentityOrder) {
    const auto spec = BlockSpec::from_lengths(std::vector<int>{3, 2}, 1);
    const auto r = importances(constant_model(0.0, 6), spec);
    EXPECT_EQ(r.importance, std::vector<double>(6, 0.0));
    EXPECT_EQ(r.per_block_order[0], (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_EQ(r.per_block_order[1], (std::vector<std::size_t>{3, 4}));
}

TEST(Importances, NormalizedAndBlockOrdersArePermutations) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto cfg = small_config({5, 7}, 3, 300, 2, 1, 0.5, seed);
        const Dataset ds = generate_synthetic(cfg);
        const auto model = fit(ds, FeatureMask::all(ds.cols()), GbmConfig{});
        const auto r = importances(model, cfg.spec);
        const double sum = std::accumulate(r.importance.begin(), r.importance.end(), 0.0);
        EXPECT_NEAR(sum, 1.0, 1e-12);
        for (std::size_t b = 0; b < cfg.spec.block_count(); ++b) {
            auto order = r.per_block_order[b];
            for (std::size_t i = 1; i < order.size(); ++i) {
                const double prev = r.importance[order[i - 1]], cur = r.importance[order[i]];
                EXPECT_TRUE(prev > cur || (prev == cur && order[i - 1] < order[i]));
            }
            std::sort(order.begin(), order.end());
            std::vector<std::size_t> expected(cfg.spec.block_length(b));
            std::iota(expected.begin(), expected.end(), cfg.spec.block_offset(b));
            EXPECT_EQ(order, expected);
        }
    }
}

TEST(Importances, PlantedFeaturesRankInTopFive) {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto cfg = small_config({}, 12, 300, 0, 3, 0.5, seed);
        const Dataset ds = generate_synthetic(cfg);
        const auto r = importances(fit(ds, FeatureMask::all(12), GbmConfig{}), cfg.spec);
        std::vector<std::size_t> order(12);
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(),
                         [&](auto a, auto b) { return r.importance[a] > r.importance[b]; });
        const std::set<std::size_t> top(order.begin(), order.begin() + 5);
        const auto planted = informative_features(cfg);
        hits += std::all_of(planted.begin(), planted.end(), [&](auto f) { return top.contains(f); }) ? 1 : 0;
    }
    EXPECT_GE(hits, 40);
}

TEST(ModelJson, NestedNodes) {
    const Dataset ds = generate_synthetic(small_config({3}, 2, 200, 1, 1, 0.5, 2));
    const auto doc = nlohmann::json::parse(model_to_json(fit(ds, FeatureMask::all(ds.cols()), GbmConfig{3, 2, 0.1, 5, 0})));
    ASSERT_EQ(doc["trees"].size(), 3u);
    EXPECT_TRUE(doc["trees"][0].contains("left"));
    EXPECT_TRUE(doc["trees"][0]["left"].contains("samples"));
}

TEST(SubsetScorer, MemoizesByMask) {
    const Dataset ds = generate_synthetic(small_config({3}, 2, 200, 1, 1, 0.5, 2));
    const auto s = split(ds, 0.7, 1);
    SubsetScorer scorer(s, GbmConfig{});
    const auto mask = FeatureMask::from_indices(ds.cols(), {0, 3});
    const double first = scorer.evaluate(mask);
    EXPECT_EQ(scorer.fits(), 1u);
    EXPECT_TRUE(scorer.cached(mask));
    EXPECT_EQ(scorer.evaluate(mask), first);
    EXPECT_EQ(scorer.fits(), 1u);
    EXPECT_EQ(scorer.calls(), 2u);
    EXPECT_EQ(first, score(fit(s.train, mask, GbmConfig{}), s.test, mask));
    EXPECT_THROW(scorer.evaluate(FeatureMask::none(ds.cols())), std::invalid_argument);
    EXPECT_THROW(scorer.evaluate(FeatureMask::all(2)), std::invalid_argument);
}

TEST(SubsetScorer, ParallelBatchMatchesSequential) {
    const Dataset ds = generate_synthetic(small_config({4, 4}, 2, 300, 2, 1, 0.5, 6));
    const auto s = split(ds, 0.7, 3);
    std::vector<FeatureMask> masks;
    for (std::size_t i = 0; i < ds.cols(); ++i) masks.push_back(flip(FeatureMask::all(ds.cols()), i));
    masks.push_back(masks.front());  // duplicate
    SubsetScorer sequential(s, GbmConfig{});
    std::vector<double> expected;
    for (const auto& m : masks) expected.push_back(sequential.evaluate(m));
    SubsetScorer parallel(s, GbmConfig{});
    parallel.set_threads(4);
    EXPECT_EQ(parallel.evaluate_batch(masks), expected);
    EXPECT_EQ(parallel.fits(), sequential.fits());
    EXPECT_EQ(parallel.calls(), sequential.calls());
}

TEST(SubsetScorer, InformativeMaskUsuallyBeatsFullMask) {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto cfg = small_config({10, 10}, 10, 400, 2, 2, 1.5, seed);
        const Dataset ds = generate_synthetic(cfg);
        const auto s = split(ds, 0.7, seed);
        SubsetScorer scorer(s, GbmConfig{});
        const double informative = scorer.evaluate(FeatureMask::from_indices(ds.cols(), informative_features(cfg)));
        const double full = scorer.evaluate(FeatureMask::all(ds.cols()));
        wins += informative >= full ? 1 : 0;
    }
    EXPECT_GE(wins, 12);
}
