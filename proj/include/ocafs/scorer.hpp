#pragma once

#include "ocafs/dataset.hpp"
#include "ocafs/selection.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace ocafs {

struct GbmConfig {
    int n_trees = 50;
    int max_depth = 3;
    double learning_rate = 0.1;
    int min_samples_leaf = 5;
    // The booster has no stochastic step; the seed is carried so reports
    // echo every source of randomness.
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // rows with x <= threshold go left
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf output before shrinkage
    double impurity_decrease = 0.0;
    std::size_t samples = 0;

    bool is_leaf() const { return feature < 0; }
};

class RegressionTree {
public:
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(std::span<const double> row) const;
    /// Number of split levels on the deepest root-to-leaf path.
    int depth() const;
};

class FittedModel {
public:
    std::vector<RegressionTree> trees;
    double base_score = 0.0;
    GbmConfig config;
    std::size_t feature_count = 0;
    FeatureMask mask;

    double margin(std::span<const double> row) const;
    double probability(std::span<const double> row) const;
    int predict(std::span<const double> row) const { return probability(row) >= 0.5 ? 1 : 0; }
    std::size_t split_count() const;
};

struct ImportanceRanking {
    std::vector<double> importance;  // one per feature; sums to 1 or is all zero
    /// Per block, the block's flat feature indices by descending importance,
    /// ties broken by ascending index.
    std::vector<std::vector<std::size_t>> per_block_order;
};

/// Column-major binned copy of a training set. Split candidates are the
/// midpoints between adjacent distinct values, thinned to sample quantiles
/// when a column has more than max_bins distinct values.
class TrainingFrame {
public:
    explicit TrainingFrame(const Dataset& train, int max_bins = 256);

    std::size_t rows() const { return labels_.size(); }
    std::size_t cols() const { return cuts_.size(); }
    const std::vector<std::uint8_t>& labels() const { return labels_; }
    std::span<const std::uint8_t> bins(std::size_t f) const { return {bins_.data() + f * rows(), rows()}; }
    /// Cut thresholds of feature f; bin b holds values in (cut[b-1], cut[b]].
    const std::vector<double>& cuts(std::size_t f) const { return cuts_[f]; }
    std::size_t bin_count(std::size_t f) const { return cuts_[f].size() + 1; }

private:
    std::vector<std::uint8_t> bins_;
    std::vector<std::vector<double>> cuts_;
    std::vector<std::uint8_t> labels_;
};

/// Gini impurity 1 - sum p_c^2 of a class-proportion vector.
double gini_impurity(std::span<const double> proportions);

/// Logistic-loss gradient boosting restricted to the features set in mask.
/// Throws std::invalid_argument on an empty mask or single-class data.
FittedModel fit(const TrainingFrame& frame, const FeatureMask& mask, const GbmConfig& config);
FittedModel fit(const Dataset& train, const FeatureMask& mask, const GbmConfig& config);

/// Fraction of rows whose predicted class matches the label.
double score(const FittedModel& model, const Dataset& test, const FeatureMask& mask);

/// Impurity-decrease importances summed over all splits.
ImportanceRanking importances(const FittedModel& model, const BlockSpec& spec);

/// Model dump with nodes as nested objects.
std::string model_to_json(const FittedModel& model);

/// Memoized mask -> score map. fits() counts cache misses (distinct
/// evaluations); calls() counts every request. Safe for concurrent use.
class SubsetScorer {
public:
    using ScoreFn = std::function<double(const FeatureMask&)>;

    /// Fits on split.train and scores on split.test.
    SubsetScorer(const SplitDataset& split, const GbmConfig& config);
    /// Arbitrary objective, used by tests and enumeration oracles.
    SubsetScorer(std::size_t feature_count, ScoreFn fn);

    /// Throws std::invalid_argument on an empty or wrong-length mask.
    double evaluate(const FeatureMask& mask);
    /// Scores all masks, running cache misses on up to `threads` workers.
    /// Results and counters match sequential evaluation in order.
    std::vector<double> evaluate_batch(const std::vector<FeatureMask>& masks);

    void set_threads(unsigned threads) { threads_ = threads == 0 ? 1 : threads; }
    std::size_t feature_count() const { return feature_count_; }
    std::size_t fits() const;
    std::size_t calls() const;
    bool cached(const FeatureMask& mask) const;

private:
    void check(const FeatureMask& mask) const;

    std::size_t feature_count_;
    ScoreFn fn_;
    unsigned threads_ = 1;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, double> cache_;
    std::size_t fits_ = 0;
    std::size_t calls_ = 0;
};

}  // namespace ocafs
