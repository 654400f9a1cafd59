#include "ocafs/selection.hpp"

#include "ocafs/scorer.hpp"

#include <algorithm>
#include <stdexcept>

namespace ocafs {

FeatureMask::FeatureMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto& b : bits_) b = b ? 1 : 0;
}

FeatureMask FeatureMask::from_bitstring(const std::string& bits) {
    std::vector<std::uint8_t> out;
    out.reserve(bits.size());
    for (char c : bits) {
        if (c != '0' && c != '1') throw std::invalid_argument("mask bit-string must contain only 0/1");
        out.push_back(c == '1');
    }
    return FeatureMask(std::move(out));
}

FeatureMask FeatureMask::from_indices(std::size_t n, const std::vector<std::size_t>& on) {
    FeatureMask m(n);
    for (auto i : on) {
        if (i >= n) throw std::out_of_range("feature index out of range");
        m.set(i, true);
    }
    return m;
}

std::size_t FeatureMask::popcount() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::vector<std::size_t> FeatureMask::selected() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i]) out.push_back(i);
    return out;
}

std::string FeatureMask::to_bitstring() const {
    std::string s(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i]) s[i] = '1';
    return s;
}

std::vector<std::string> FeatureMask::selected_names(const BlockSpec& spec) const {
    const auto names = spec.column_names();
    if (names.size() != size()) throw std::invalid_argument("mask length does not match the block spec");
    std::vector<std::string> out;
    for (auto i : selected()) out.push_back(names[i]);
    return out;
}

SelectionState SelectionState::uniform(const BlockSpec& spec, int k) {
    return {std::vector<int>(spec.block_count(), k), std::vector<std::uint8_t>(spec.single_count(), 1)};
}

void SelectionState::validate(const BlockSpec& spec) const {
    if (k.size() != spec.block_count() || singles.size() != spec.single_count())
        throw std::invalid_argument("selection state shape does not match the block spec");
    for (std::size_t b = 0; b < k.size(); ++b) {
        if (k[b] < 1 || static_cast<std::size_t>(k[b]) > spec.block_length(b))
            throw std::invalid_argument("retained count out of range for block " + spec.blocks()[b].name);
    }
}

FeatureMask expand(const SelectionState& state, const ImportanceRanking& ranking, const BlockSpec& spec) {
    state.validate(spec);
    if (ranking.per_block_order.size() != spec.block_count() ||
        ranking.importance.size() != spec.feature_count())
        throw std::invalid_argument("ranking structure does not match the block spec");
    FeatureMask mask(spec.feature_count());
    for (std::size_t b = 0; b < spec.block_count(); ++b) {
        const auto& order = ranking.per_block_order[b];
        if (order.size() != spec.block_length(b))
            throw std::invalid_argument("ranking order length does not match block " + spec.blocks()[b].name);
        for (int j = 0; j < state.k[b]; ++j) mask.set(order[static_cast<std::size_t>(j)], true);
    }
    for (std::size_t s = 0; s < spec.single_count(); ++s)
        mask.set(spec.singles_offset() + s, state.singles[s] != 0);
    return mask;
}

FeatureMask flip(const FeatureMask& mask, std::size_t i) {
    if (i >= mask.size()) throw std::out_of_range("flip index out of range");
    FeatureMask out = mask;
    out.set(i, !mask.test(i));
    return out;
}

double popcount_pct(const FeatureMask& mask) {
    if (mask.size() == 0) return 0.0;
    return 100.0 * static_cast<double>(mask.popcount()) / static_cast<double>(mask.size());
}

}  // namespace ocafs
