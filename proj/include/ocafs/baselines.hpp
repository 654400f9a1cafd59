#pragma once

#include "ocafs/oca.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace ocafs {

struct RfeConfig {
    std::size_t n_features_to_select = 1;
    std::size_t step = 1;

    void validate(std::size_t feature_count) const;
};

/// Binary coordinate ascent: the flip ascent started from the all-ones mask.
SelectionResult run_bca(SubsetScorer& scorer, double eps, int itmax);
SelectionResult run_bca(const SplitDataset& split, const GbmConfig& gbm, double eps, int itmax);

/// Recursive feature elimination with a refit and re-ranking every round.
SelectionResult run_rfe(const SplitDataset& split, const GbmConfig& gbm, const RfeConfig& rfe);

/// One RFE result per target (targets must be non-increasing). With step 1
/// a single elimination pass serves every target.
std::vector<std::pair<std::size_t, SelectionResult>> rfe_sweep(const SplitDataset& split, const GbmConfig& gbm,
                                                               const std::vector<std::size_t>& targets,
                                                               std::size_t step = 1);

}  // namespace ocafs
