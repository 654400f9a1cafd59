#include "ocafs/scorer.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace ocafs {

void GbmConfig::validate() const {
    if (n_trees < 1) throw std::invalid_argument("n_trees must be positive");
    if (max_depth < 1) throw std::invalid_argument("max_depth must be positive");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
        throw std::invalid_argument("learning_rate must lie in (0, 1]");
    if (min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be positive");
}

double RegressionTree::predict(std::span<const double> row) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].value;
}

int RegressionTree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<std::pair<std::size_t, int>> stack{{0, 0}};
    int deepest = 0;
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (!nodes[i].is_leaf()) {
            stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
            stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
        }
    }
    return deepest;
}

double FittedModel::margin(std::span<const double> row) const {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(row);
    return base_score + config.learning_rate * sum;
}

double FittedModel::probability(std::span<const double> row) const {
    return 1.0 / (1.0 + std::exp(-margin(row)));
}

std::size_t FittedModel::split_count() const {
    std::size_t n = 0;
    for (const auto& t : trees)
        for (const auto& node : t.nodes) n += node.is_leaf() ? 0 : 1;
    return n;
}

TrainingFrame::TrainingFrame(const Dataset& train, int max_bins) : labels_(train.labels()) {
    if (max_bins < 2 || max_bins > 256) throw std::invalid_argument("max_bins must lie in [2, 256]");
    const std::size_t n = train.rows();
    const std::size_t m = train.cols();
    bins_.resize(n * m);
    cuts_.resize(m);
    std::vector<double> column(n);
    std::vector<double> sorted(n);
    for (std::size_t f = 0; f < m; ++f) {
        for (std::size_t r = 0; r < n; ++r) column[r] = train.at(r, f);
        sorted = column;
        std::sort(sorted.begin(), sorted.end());
        auto& cuts = cuts_[f];
        auto midpoint = [](double a, double b) {
            double c = a + (b - a) / 2.0;
            return c >= b ? a : c;
        };
        std::vector<double> uniq = sorted;
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        if (uniq.size() <= static_cast<std::size_t>(max_bins)) {
            for (std::size_t u = 0; u + 1 < uniq.size(); ++u) cuts.push_back(midpoint(uniq[u], uniq[u + 1]));
        } else {
            for (int q = 1; q < max_bins; ++q) {
                const std::size_t pos = static_cast<std::size_t>(q) * n / static_cast<std::size_t>(max_bins);
                if (pos == 0) continue;
                const double v = sorted[pos - 1];
                auto next = std::upper_bound(uniq.begin(), uniq.end(), v);
                if (next == uniq.end()) continue;
                const double c = midpoint(v, *next);
                if (cuts.empty() || c > cuts.back()) cuts.push_back(c);
            }
        }
        auto* out = bins_.data() + f * n;
        for (std::size_t r = 0; r < n; ++r) {
            out[r] = static_cast<std::uint8_t>(std::lower_bound(cuts.begin(), cuts.end(), column[r]) - cuts.begin());
        }
    }
}

double gini_impurity(std::span<const double> proportions) {
    double sq = 0.0;
    for (double p : proportions) sq += p * p;
    return 1.0 - sq;
}

namespace {

constexpr double kMinGain = 1e-12;

struct SplitChoice {
    int feature = -1;
    int bin = -1;
    double gain = kMinGain;
};

// Grows one least-squares regression tree on the residuals; leaf values are
// Newton steps sum(r) / sum(h). Partitions the row index vector in place.
class TreeGrower {
public:
    TreeGrower(const TrainingFrame& frame, const std::vector<std::size_t>& features,
               const std::vector<double>& residual, const std::vector<double>& hessian,
               const GbmConfig& config)
        : frame_(frame), features_(features), residual_(residual), hessian_(hessian), config_(config) {
        offsets_.push_back(0);
        for (auto f : features_) offsets_.push_back(offsets_.back() + frame_.bin_count(f));
        sum_.resize(offsets_.back());
        count_.resize(offsets_.back());
        scratch_.reserve(frame.rows());
    }

    struct Leaf {
        std::size_t node;
        std::size_t begin;
        std::size_t end;
    };

    RegressionTree grow(std::vector<std::uint32_t>& rows) {
        leaves_.clear();
        RegressionTree tree;
        tree.nodes.emplace_back();
        build(tree, 0, rows, 0, rows.size(), 0);
        return tree;
    }

    // Row ranges of each leaf in the partitioned row order; valid after grow().
    const std::vector<Leaf>& leaves() const { return leaves_; }

private:
    void build(RegressionTree& tree, std::size_t node, std::vector<std::uint32_t>& rows,
               std::size_t begin, std::size_t end, int depth) {
        const std::size_t n = end - begin;
        tree.nodes[node].samples = n;
        const auto min_leaf = static_cast<std::size_t>(config_.min_samples_leaf);
        SplitChoice best;
        if (depth < config_.max_depth && n >= 2 * min_leaf) best = find_split(rows, begin, end);
        if (best.feature < 0) {
            double g = 0.0, h = 0.0;
            for (std::size_t i = begin; i < end; ++i) {
                g += residual_[rows[i]];
                h += hessian_[rows[i]];
            }
            tree.nodes[node].value = h > 1e-12 ? g / h : 0.0;
            leaves_.push_back({node, begin, end});
            return;
        }
        const auto feature = static_cast<std::size_t>(best.feature);
        const auto bins = frame_.bins(feature);
        const auto cut = static_cast<std::uint8_t>(best.bin);
        scratch_.clear();
        std::size_t w = begin;
        for (std::size_t i = begin; i < end; ++i) {
            if (bins[rows[i]] <= cut) rows[w++] = rows[i];
            else scratch_.push_back(rows[i]);
        }
        std::copy(scratch_.begin(), scratch_.end(), rows.begin() + static_cast<std::ptrdiff_t>(w));

        const auto left = tree.nodes.size();
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        auto& parent = tree.nodes[node];
        parent.feature = best.feature;
        parent.threshold = frame_.cuts(feature)[cut];
        parent.impurity_decrease = best.gain;
        parent.left = static_cast<int>(left);
        parent.right = static_cast<int>(left + 1);
        build(tree, left, rows, begin, w, depth + 1);
        build(tree, left + 1, rows, w, end, depth + 1);
    }

    SplitChoice find_split(const std::vector<std::uint32_t>& rows, std::size_t begin, std::size_t end) {
        const std::size_t n = end - begin;
        const auto min_leaf = static_cast<std::size_t>(config_.min_samples_leaf);
        double total = 0.0;
        for (std::size_t i = begin; i < end; ++i) total += residual_[rows[i]];
        const double parent_term = total * total / static_cast<double>(n);

        SplitChoice best;
        for (std::size_t k = 0; k < features_.size(); ++k) {
            const auto f = features_[k];
            const std::size_t nb = frame_.bin_count(f);
            if (nb < 2) continue;
            double* sum = sum_.data() + offsets_[k];
            std::uint32_t* cnt = count_.data() + offsets_[k];
            std::fill(sum, sum + nb, 0.0);
            std::fill(cnt, cnt + nb, 0u);
            const std::uint8_t* bins = frame_.bins(f).data();
            for (std::size_t i = begin; i < end; ++i) {
                const auto r = rows[i];
                sum[bins[r]] += residual_[r];
                ++cnt[bins[r]];
            }
            double left_sum = 0.0;
            std::size_t left_n = 0;
            for (std::size_t b = 0; b + 1 < nb; ++b) {
                left_sum += sum[b];
                left_n += cnt[b];
                if (cnt[b] == 0 || left_n < min_leaf) continue;
                const std::size_t right_n = n - left_n;
                if (right_n < min_leaf) break;
                const double right_sum = total - left_sum;
                const double gain = left_sum * left_sum / static_cast<double>(left_n) +
                                    right_sum * right_sum / static_cast<double>(right_n) - parent_term;
                if (gain > best.gain) best = {static_cast<int>(f), static_cast<int>(b), gain};
            }
        }
        return best;
    }

    const TrainingFrame& frame_;
    const std::vector<std::size_t>& features_;
    const std::vector<double>& residual_;
    const std::vector<double>& hessian_;
    const GbmConfig& config_;
    std::vector<std::size_t> offsets_;
    std::vector<double> sum_;
    std::vector<std::uint32_t> count_;
    std::vector<std::uint32_t> scratch_;
    std::vector<Leaf> leaves_;
};

}  // namespace

FittedModel fit(const TrainingFrame& frame, const FeatureMask& mask, const GbmConfig& config) {
    config.validate();
    if (mask.size() != frame.cols()) throw std::invalid_argument("mask length does not match the feature count");
    const auto features = mask.selected();
    if (features.empty()) throw std::invalid_argument("cannot fit on an empty feature mask");
    const std::size_t n = frame.rows();
    const auto& y = frame.labels();
    const auto positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    if (positives == 0 || positives == n) throw std::invalid_argument("training data must contain both classes");

    FittedModel model;
    model.config = config;
    model.feature_count = frame.cols();
    model.mask = mask;
    const double prior = static_cast<double>(positives) / static_cast<double>(n);
    model.base_score = std::log(prior / (1.0 - prior));

    std::vector<double> raw(n, model.base_score);
    std::vector<double> residual(n);
    std::vector<double> hessian(n);
    std::vector<std::uint32_t> rows(n);
    TreeGrower grower(frame, features, residual, hessian, config);
    model.trees.reserve(static_cast<std::size_t>(config.n_trees));
    for (int t = 0; t < config.n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = 1.0 / (1.0 + std::exp(-raw[i]));
            residual[i] = static_cast<double>(y[i]) - p;
            hessian[i] = p * (1.0 - p);
        }
        std::iota(rows.begin(), rows.end(), 0u);
        RegressionTree tree = grower.grow(rows);
        for (const auto& leaf : grower.leaves()) {
            const double step = config.learning_rate * tree.nodes[leaf.node].value;
            for (std::size_t i = leaf.begin; i < leaf.end; ++i) raw[rows[i]] += step;
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

FittedModel fit(const Dataset& train, const FeatureMask& mask, const GbmConfig& config) {
    return fit(TrainingFrame(train), mask, config);
}

double score(const FittedModel& model, const Dataset& test, const FeatureMask& mask) {
    if (!(mask == model.mask)) throw std::invalid_argument("mask differs from the mask used at fit time");
    if (test.cols() != model.feature_count) throw std::invalid_argument("test set has the wrong feature count");
    if (test.rows() == 0) throw std::invalid_argument("cannot score an empty test set");
    std::size_t correct = 0;
    for (std::size_t r = 0; r < test.rows(); ++r)
        correct += model.predict(test.row(r)) == test.labels()[r] ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(test.rows());
}

ImportanceRanking importances(const FittedModel& model, const BlockSpec& spec) {
    if (spec.feature_count() != model.feature_count)
        throw std::invalid_argument("block spec does not match the model's feature count");
    ImportanceRanking out;
    out.importance.assign(model.feature_count, 0.0);
    for (const auto& t : model.trees)
        for (const auto& node : t.nodes)
            if (!node.is_leaf()) out.importance[static_cast<std::size_t>(node.feature)] += node.impurity_decrease;
    const double total = std::accumulate(out.importance.begin(), out.importance.end(), 0.0);
    if (total > 0.0)
        for (auto& v : out.importance) v /= total;
    for (std::size_t b = 0; b < spec.block_count(); ++b) {
        std::vector<std::size_t> order(spec.block_length(b));
        std::iota(order.begin(), order.end(), spec.block_offset(b));
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
            return out.importance[a] > out.importance[c];
        });
        out.per_block_order.push_back(std::move(order));
    }
    return out;
}

namespace {

nlohmann::ordered_json node_json(const RegressionTree& tree, std::size_t i) {
    const auto& n = tree.nodes[i];
    nlohmann::ordered_json j;
    j["samples"] = n.samples;
    if (n.is_leaf()) {
        j["value"] = n.value;
        return j;
    }
    j["feature"] = n.feature;
    j["threshold"] = n.threshold;
    j["impurity_decrease"] = n.impurity_decrease;
    j["left"] = node_json(tree, static_cast<std::size_t>(n.left));
    j["right"] = node_json(tree, static_cast<std::size_t>(n.right));
    return j;
}

}  // namespace

std::string model_to_json(const FittedModel& model) {
    nlohmann::ordered_json doc;
    doc["base_score"] = model.base_score;
    doc["learning_rate"] = model.config.learning_rate;
    doc["feature_count"] = model.feature_count;
    doc["mask"] = model.mask.to_bitstring();
    doc["trees"] = nlohmann::ordered_json::array();
    for (const auto& t : model.trees) doc["trees"].push_back(node_json(t, 0));
    return doc.dump(2);
}

SubsetScorer::SubsetScorer(const SplitDataset& split, const GbmConfig& config)
    : feature_count_(split.train.cols()) {
    config.validate();
    auto frame = std::make_shared<const TrainingFrame>(split.train);
    auto test = std::make_shared<const Dataset>(split.test);
    fn_ = [frame, test, config](const FeatureMask& mask) {
        return score(fit(*frame, mask, config), *test, mask);
    };
}

SubsetScorer::SubsetScorer(std::size_t feature_count, ScoreFn fn)
    : feature_count_(feature_count), fn_(std::move(fn)) {}

void SubsetScorer::check(const FeatureMask& mask) const {
    if (mask.size() != feature_count_) throw std::invalid_argument("mask length does not match the feature count");
    if (mask.empty_selection()) throw std::invalid_argument("cannot score an empty feature mask");
}

double SubsetScorer::evaluate(const FeatureMask& mask) {
    check(mask);
    const std::string key = mask.to_bitstring();
    {
        std::lock_guard lock(mutex_);
        ++calls_;
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    const double value = fn_(mask);
    std::lock_guard lock(mutex_);
    auto [it, inserted] = cache_.emplace(key, value);
    if (inserted) ++fits_;
    return it->second;
}

std::vector<double> SubsetScorer::evaluate_batch(const std::vector<FeatureMask>& masks) {
    for (const auto& m : masks) check(m);
    std::vector<std::string> keys;
    keys.reserve(masks.size());
    std::vector<std::size_t> pending;  // first occurrence of each uncached key
    {
        std::lock_guard lock(mutex_);
        std::unordered_map<std::string, std::size_t> seen;
        for (std::size_t i = 0; i < masks.size(); ++i) {
            keys.push_back(masks[i].to_bitstring());
            if (!cache_.contains(keys.back()) && seen.emplace(keys.back(), i).second) pending.push_back(i);
        }
    }
    std::vector<double> computed(pending.size());
    const unsigned workers = std::min<unsigned>(threads_, static_cast<unsigned>(pending.size()));
    if (workers <= 1) {
        for (std::size_t j = 0; j < pending.size(); ++j) computed[j] = fn_(masks[pending[j]]);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t j = w; j < pending.size(); j += workers) computed[j] = fn_(masks[pending[j]]);
            });
        }
    }
    std::lock_guard lock(mutex_);
    for (std::size_t j = 0; j < pending.size(); ++j)
        if (cache_.emplace(keys[pending[j]], computed[j]).second) ++fits_;
    std::vector<double> out;
    out.reserve(masks.size());
    for (const auto& k : keys) out.push_back(cache_.at(k));
    calls_ += masks.size();
    return out;
}

std::size_t SubsetScorer::fits() const {
    std::lock_guard lock(mutex_);
    return fits_;
}

std::size_t SubsetScorer::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

bool SubsetScorer::cached(const FeatureMask& mask) const {
    std::lock_guard lock(mutex_);
    return cache_.contains(mask.to_bitstring());
}

}  // namespace ocafs
