#pragma once

#include "ocafs/dataset.hpp"
#include "ocafs/scorer.hpp"
#include "ocafs/selection.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace ocafs {

enum class Phase { jbest, block, flip, rfe };
enum class StopReason { converged, max_iterations };

std::string to_string(Phase phase);
std::string to_string(StopReason reason);

struct OcaConfig {
    double eps1 = 1e-6;
    double eps2 = 1e-6;
    int itmax1 = 20;
    int itmax2 = 50;

    void validate() const;
};

/// One tested candidate. `accepted` marks candidates that became the
/// incumbent (the chosen argmax in the J-Best and block phases, a taken
/// flip in the flip phase).
struct TraceEntry {
    Phase phase = Phase::flip;
    std::size_t step = 0;
    std::size_t popcount = 0;
    double score = 0.0;
    bool accepted = false;
};

using Trace = std::vector<TraceEntry>;

struct SelectionResult {
    std::string method;
    FeatureMask mask;
    double score = 0.0;
    std::size_t evaluations = 0;  // distinct scorer fits (cache misses)
    std::size_t candidates = 0;   // candidates tested, cache hits included
    Trace trace;
    StopReason stop_reason = StopReason::converged;
    std::size_t sweeps = 0;  // sweeps of the final ascent phase

    // OCA only.
    std::optional<int> k_star;
    std::optional<SelectionState> block_state;
    std::optional<StopReason> block_stop_reason;
    std::size_t block_sweeps = 0;

    // RFE only: features in the order they were eliminated.
    std::vector<std::size_t> elimination_order;
};

/// Scores the uniform states (k, ..., k, 1_p) for k = 1..min L_i and
/// returns the one with the smallest maximizing k.
SelectionState jbest_init(SubsetScorer& scorer, const ImportanceRanking& ranking, const BlockSpec& spec,
                          Trace* trace = nullptr);

struct BlockAscent {
    SelectionState state;
    double score = 0.0;
    StopReason stop_reason = StopReason::converged;
    std::size_t sweeps = 0;
};

/// Gauss-Seidel sweeps over the blocks: each block's retained count moves
/// to the smallest maximizer over 1..L_b with the other blocks at their
/// latest values. Singles stay on.
BlockAscent phase1_block_ascent(SubsetScorer& scorer, const ImportanceRanking& ranking, const BlockSpec& spec,
                                const SelectionState& init, const OcaConfig& config, Trace* trace = nullptr);

/// Single-bit flip ascent over all features starting from init_mask.
/// A flip is taken when it raises the score, or keeps it with fewer
/// features. An empty candidate scores 0.
SelectionResult flip_ascent(SubsetScorer& scorer, const FeatureMask& init_mask, double eps, int itmax,
                            Trace trace = {});

SelectionResult phase2_flip_ascent(SubsetScorer& scorer, const FeatureMask& init_mask, const OcaConfig& config,
                                   Trace trace = {});

/// J-Best, block ascent and flip ascent against an existing scorer.
SelectionResult run_oca(SubsetScorer& scorer, const ImportanceRanking& ranking, const BlockSpec& spec,
                        const OcaConfig& config);

/// Full pipeline: ranks features with a model fitted on every training
/// column, then runs the three phases on split's test accuracy.
SelectionResult run_oca(const SplitDataset& split, const GbmConfig& gbm, const OcaConfig& config,
                        unsigned threads = 1);

/// Importance ranking from a model fitted on all features of split.train.
ImportanceRanking full_model_ranking(const SplitDataset& split, const GbmConfig& gbm);

}  // namespace ocafs
