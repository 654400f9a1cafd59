#include "ocafs/oca.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ocafs {

std::string to_string(Phase phase) {
    switch (phase) {
        case Phase::jbest: return "jbest";
        case Phase::block: return "block";
        case Phase::flip: return "flip";
        case Phase::rfe: return "rfe";
    }
    return "unknown";
}

std::string to_string(StopReason reason) {
    return reason == StopReason::converged ? "converged" : "max_iterations";
}

void OcaConfig::validate() const {
    if (!(eps1 >= 0.0) || !(eps2 >= 0.0)) throw std::invalid_argument("eps1 and eps2 must be nonnegative");
    if (itmax1 < 1 || itmax2 < 1) throw std::invalid_argument("iteration caps must be positive");
}

namespace {

void record(Trace* trace, Phase phase, std::size_t popcount, double score, bool accepted) {
    if (trace) trace->push_back({phase, trace->size(), popcount, score, accepted});
}

// Index of the first maximum.
std::size_t first_argmax(const std::vector<double>& values) {
    return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace

SelectionState jbest_init(SubsetScorer& scorer, const ImportanceRanking& ranking, const BlockSpec& spec,
                          Trace* trace) {
    if (spec.block_count() == 0) return SelectionState::uniform(spec, 0);
    const int l_min = static_cast<int>(spec.min_block_length());
    std::vector<FeatureMask> candidates;
    for (int k = 1; k <= l_min; ++k) candidates.push_back(expand(SelectionState::uniform(spec, k), ranking, spec));
    const auto scores = scorer.evaluate_batch(candidates);
    const std::size_t best = first_argmax(scores);
    for (std::size_t i = 0; i < scores.size(); ++i)
        record(trace, Phase::jbest, candidates[i].popcount(), scores[i], i == best);
    return SelectionState::uniform(spec, static_cast<int>(best) + 1);
}

BlockAscent phase1_block_ascent(SubsetScorer& scorer, const ImportanceRanking& ranking, const BlockSpec& spec,
                                const SelectionState& init, const OcaConfig& config, Trace* trace) {
    config.validate();
    init.validate(spec);
    BlockAscent out;
    out.state = init;
    std::fill(out.state.singles.begin(), out.state.singles.end(), std::uint8_t{1});
    if (spec.block_count() == 0) return out;
    out.score = scorer.evaluate(expand(out.state, ranking, spec));
    out.stop_reason = StopReason::max_iterations;

    for (int sweep = 0; sweep < config.itmax1; ++sweep) {
        const double before = out.score;
        const SelectionState start = out.state;
        for (std::size_t b = 0; b < spec.block_count(); ++b) {
            std::vector<FeatureMask> candidates;
            SelectionState probe = out.state;
            for (std::size_t j = 1; j <= spec.block_length(b); ++j) {
                probe.k[b] = static_cast<int>(j);
                candidates.push_back(expand(probe, ranking, spec));
            }
            const auto scores = scorer.evaluate_batch(candidates);
            const std::size_t best = first_argmax(scores);
            for (std::size_t i = 0; i < scores.size(); ++i)
                record(trace, Phase::block, candidates[i].popcount(), scores[i], i == best);
            out.state.k[b] = static_cast<int>(best) + 1;
            out.score = scores[best];
        }
        ++out.sweeps;
        if (std::abs(out.score - before) < config.eps1 || out.state == start) {
            out.stop_reason = StopReason::converged;
            break;
        }
    }
    return out;
}

SelectionResult flip_ascent(SubsetScorer& scorer, const FeatureMask& init_mask, double eps, int itmax,
                            Trace trace) {
    if (!(eps >= 0.0)) throw std::invalid_argument("eps must be nonnegative");
    if (itmax < 1) throw std::invalid_argument("iteration cap must be positive");
    if (init_mask.size() != scorer.feature_count())
        throw std::invalid_argument("initial mask length does not match the feature count");

    const std::size_t fits_before = scorer.fits();
    const std::size_t calls_before = scorer.calls();
    std::size_t empty_candidates = 0;
    auto evaluate = [&](const FeatureMask& m) {
        if (m.empty_selection()) {
            ++empty_candidates;
            return 0.0;
        }
        return scorer.evaluate(m);
    };

    SelectionResult out;
    out.mask = init_mask;
    out.score = evaluate(init_mask);
    record(&trace, Phase::flip, out.mask.popcount(), out.score, true);
    out.stop_reason = StopReason::max_iterations;

    const std::size_t n = init_mask.size();
    for (int sweep = 0; sweep < itmax; ++sweep) {
        const double before = out.score;
        bool moved = false;
        for (std::size_t i = 0; i < n; ++i) {
            FeatureMask candidate = flip(out.mask, i);
            const double s = evaluate(candidate);
            const bool accept = s > out.score || (s == out.score && candidate.popcount() < out.mask.popcount());
            record(&trace, Phase::flip, candidate.popcount(), s, accept);
            if (accept) {
                out.mask = std::move(candidate);
                out.score = s;
                moved = true;
            }
        }
        ++out.sweeps;
        if (!moved || std::abs(out.score - before) < eps) {
            out.stop_reason = StopReason::converged;
            break;
        }
    }
    out.trace = std::move(trace);
    out.evaluations = scorer.fits() - fits_before;
    out.candidates = scorer.calls() - calls_before + empty_candidates;
    return out;
}

SelectionResult phase2_flip_ascent(SubsetScorer& scorer, const FeatureMask& init_mask, const OcaConfig& config,
                                   Trace trace) {
    config.validate();
    return flip_ascent(scorer, init_mask, config.eps2, config.itmax2, std::move(trace));
}

SelectionResult run_oca(SubsetScorer& scorer, const ImportanceRanking& ranking, const BlockSpec& spec,
                        const OcaConfig& config) {
    config.validate();
    const std::size_t fits_before = scorer.fits();
    const std::size_t calls_before = scorer.calls();
    Trace trace;
    const SelectionState init = jbest_init(scorer, ranking, spec, &trace);
    const BlockAscent block = phase1_block_ascent(scorer, ranking, spec, init, config, &trace);
    const std::size_t calls_mid = scorer.calls();
    SelectionResult out = phase2_flip_ascent(scorer, expand(block.state, ranking, spec), config, std::move(trace));
    out.method = "oca";
    out.evaluations = scorer.fits() - fits_before;
    out.candidates += calls_mid - calls_before;
    if (spec.block_count() > 0) out.k_star = init.k.front();
    out.block_state = block.state;
    out.block_stop_reason = block.stop_reason;
    out.block_sweeps = block.sweeps;
    return out;
}

ImportanceRanking full_model_ranking(const SplitDataset& split, const GbmConfig& gbm) {
    const auto model = fit(split.train, FeatureMask::all(split.train.cols()), gbm);
    return importances(model, split.train.spec());
}

SelectionResult run_oca(const SplitDataset& split, const GbmConfig& gbm, const OcaConfig& config, unsigned threads) {
    config.validate();
    const ImportanceRanking ranking = full_model_ranking(split, gbm);
    SubsetScorer scorer(split, gbm);
    scorer.set_threads(threads);
    return run_oca(scorer, ranking, split.train.spec(), config);
}

}  // namespace ocafs
