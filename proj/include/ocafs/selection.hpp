#pragma once

#include "ocafs/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ocafs {

struct ImportanceRanking;

/// Flat binary feature selection over the BlockSpec flattening order.
class FeatureMask {
public:
    FeatureMask() = default;
    explicit FeatureMask(std::size_t n, bool value = false) : bits_(n, value ? 1 : 0) {}
    explicit FeatureMask(std::vector<std::uint8_t> bits);

    static FeatureMask all(std::size_t n) { return FeatureMask(n, true); }
    static FeatureMask none(std::size_t n) { return FeatureMask(n, false); }
    /// Inverse of to_bitstring; throws std::invalid_argument on other chars.
    static FeatureMask from_bitstring(const std::string& bits);
    static FeatureMask from_indices(std::size_t n, const std::vector<std::size_t>& on);

    std::size_t size() const { return bits_.size(); }
    bool test(std::size_t i) const { return bits_[i] != 0; }
    void set(std::size_t i, bool value) { bits_[i] = value ? 1 : 0; }
    std::size_t popcount() const;
    bool empty_selection() const { return popcount() == 0; }

    std::vector<std::size_t> selected() const;
    std::string to_bitstring() const;
    std::vector<std::string> selected_names(const BlockSpec& spec) const;

    const std::vector<std::uint8_t>& bits() const { return bits_; }
    bool operator==(const FeatureMask&) const = default;

private:
    std::vector<std::uint8_t> bits_;
};

/// Phase-1 search state: retained count per block plus one bit per single.
struct SelectionState {
    std::vector<int> k;
    std::vector<std::uint8_t> singles;

    /// Uniform k for every block, all singles on.
    static SelectionState uniform(const BlockSpec& spec, int k);
    /// Throws std::invalid_argument if the shape or a k_i is out of range.
    void validate(const BlockSpec& spec) const;
    bool operator==(const SelectionState&) const = default;
};

/// Keeps the top k_i ranked features of each block and the singles whose
/// bit is set.
FeatureMask expand(const SelectionState& state, const ImportanceRanking& ranking,
                   const BlockSpec& spec);

/// Copy of mask with bit i negated. Throws std::out_of_range.
FeatureMask flip(const FeatureMask& mask, std::size_t i);

/// 100 * popcount / N.
double popcount_pct(const FeatureMask& mask);

}  // namespace ocafs
