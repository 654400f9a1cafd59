#include "ocafs/baselines.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>

namespace ocafs {

void RfeConfig::validate(std::size_t feature_count) const {
    if (n_features_to_select < 1 || n_features_to_select > feature_count)
        throw std::invalid_argument("RFE target must lie in [1, N]");
    if (step < 1) throw std::invalid_argument("RFE step must be positive");
}

SelectionResult run_bca(SubsetScorer& scorer, double eps, int itmax) {
    SelectionResult out = flip_ascent(scorer, FeatureMask::all(scorer.feature_count()), eps, itmax);
    out.method = "bca";
    return out;
}

SelectionResult run_bca(const SplitDataset& split, const GbmConfig& gbm, double eps, int itmax) {
    SubsetScorer scorer(split, gbm);
    return run_bca(scorer, eps, itmax);
}

namespace {

// Eliminates down to the smallest target; `on_target` receives the state
// whenever the selected count equals one of the targets.
void eliminate(const SplitDataset& split, const GbmConfig& gbm, std::size_t step,
               const std::vector<std::size_t>& targets,
               const std::function<void(std::size_t, const SelectionResult&)>& on_target) {
    const BlockSpec& spec = split.train.spec();
    const std::size_t n = spec.feature_count();
    const std::size_t floor = *std::min_element(targets.begin(), targets.end());
    const TrainingFrame frame(split.train);

    SelectionResult state;
    state.method = "rfe";
    state.mask = FeatureMask::all(n);
    state.stop_reason = StopReason::converged;
    for (;;) {
        const FittedModel model = fit(frame, state.mask, gbm);
        ++state.evaluations;
        ++state.candidates;
        state.score = score(model, split.test, state.mask);
        const std::size_t count = state.mask.popcount();
        const bool hit = std::find(targets.begin(), targets.end(), count) != targets.end();
        state.trace.push_back({Phase::rfe, state.trace.size(), count, state.score, hit});
        if (hit) on_target(count, state);
        if (count <= floor) break;

        const ImportanceRanking ranking = importances(model, spec);
        std::vector<std::size_t> selected = state.mask.selected();
        std::stable_sort(selected.begin(), selected.end(), [&](std::size_t a, std::size_t b) {
            return ranking.importance[a] < ranking.importance[b];
        });
        // Never step past the next target below the current count.
        std::size_t next_target = floor;
        for (auto t : targets)
            if (t < count) next_target = std::max(next_target, t);
        const std::size_t removed = std::min(step, count - next_target);
        for (std::size_t i = 0; i < removed; ++i) {
            state.mask.set(selected[i], false);
            state.elimination_order.push_back(selected[i]);
        }
    }
}

}  // namespace

SelectionResult run_rfe(const SplitDataset& split, const GbmConfig& gbm, const RfeConfig& rfe) {
    rfe.validate(split.train.cols());
    SelectionResult result;
    eliminate(split, gbm, rfe.step, {rfe.n_features_to_select},
              [&](std::size_t, const SelectionResult& s) { result = s; });
    return result;
}

std::vector<std::pair<std::size_t, SelectionResult>> rfe_sweep(const SplitDataset& split, const GbmConfig& gbm,
                                                               const std::vector<std::size_t>& targets,
                                                               std::size_t step) {
    if (targets.empty()) return {};
    for (auto t : targets) RfeConfig{t, step}.validate(split.train.cols());
    if (!std::is_sorted(targets.begin(), targets.end(), std::greater<>()))
        throw std::invalid_argument("RFE targets must be sorted in descending order");

    std::vector<std::pair<std::size_t, SelectionResult>> out;
    if (step != 1) {
        for (auto t : targets) out.emplace_back(t, run_rfe(split, gbm, {t, step}));
        return out;
    }
    std::map<std::size_t, SelectionResult> at;
    eliminate(split, gbm, 1, targets, [&](std::size_t count, const SelectionResult& s) { at[count] = s; });
    for (auto t : targets) out.emplace_back(t, at.at(t));
    return out;
}

}  // namespace ocafs
