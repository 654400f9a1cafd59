#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ocafs {

struct Block {
    std::string name;
    std::vector<std::string> columns;

    std::size_t length() const { return columns.size(); }
    bool operator==(const Block&) const = default;
};

/// Feature layout: n blocks of correlated columns followed by p single
/// variables. The flat feature index space is block 1 columns, block 2
/// columns, ..., then singles.
class BlockSpec {
public:
    BlockSpec() = default;
    /// Throws DataError on empty blocks or duplicate names.
    BlockSpec(std::vector<Block> blocks, std::vector<std::string> singles);

    /// Blocks named B1..Bn with columns B<i>_<j>, singles S_1..S_p.
    static BlockSpec from_lengths(std::span<const int> lengths, int n_singles);

    static BlockSpec from_json_file(const std::filesystem::path& path);
    static BlockSpec from_json_text(const std::string& text);
    std::string to_json_text() const;

    const std::vector<Block>& blocks() const { return blocks_; }
    const std::vector<std::string>& singles() const { return singles_; }

    std::size_t block_count() const { return blocks_.size(); }
    std::size_t single_count() const { return singles_.size(); }
    std::size_t block_length(std::size_t b) const { return blocks_[b].length(); }
    /// Flat index of the first column of block b.
    std::size_t block_offset(std::size_t b) const { return offsets_[b]; }
    /// Flat index of the first single variable (N_B).
    std::size_t singles_offset() const { return offsets_.back(); }
    std::size_t feature_count() const { return singles_offset() + singles_.size(); }
    std::size_t min_block_length() const;

    /// Column names in flattening order.
    std::vector<std::string> column_names() const;

    bool operator==(const BlockSpec& other) const = default;

private:
    std::vector<Block> blocks_;
    std::vector<std::string> singles_;
    std::vector<std::size_t> offsets_{0};
};

/// Row-major sample matrix with binary labels. Immutable after construction.
class Dataset {
public:
    Dataset() = default;
    /// Throws DataError when the shape disagrees with the spec or a label
    /// is not 0/1.
    Dataset(BlockSpec spec, std::vector<double> features, std::vector<std::uint8_t> labels);

    const BlockSpec& spec() const { return spec_; }
    std::size_t rows() const { return labels_.size(); }
    std::size_t cols() const { return spec_.feature_count(); }

    double at(std::size_t row, std::size_t col) const { return features_[row * cols() + col]; }
    std::span<const double> row(std::size_t r) const {
        return {features_.data() + r * cols(), cols()};
    }
    const std::vector<double>& features() const { return features_; }
    const std::vector<std::uint8_t>& labels() const { return labels_; }
    std::size_t positives() const;

    /// New dataset made of the given rows, in the given order.
    Dataset subset(std::span<const std::size_t> row_ids) const;

    bool operator==(const Dataset& other) const = default;

private:
    BlockSpec spec_;
    std::vector<double> features_;
    std::vector<std::uint8_t> labels_;
};

struct SplitDataset {
    Dataset train;
    Dataset test;
    std::vector<std::size_t> train_rows;  // source row ids
    std::vector<std::size_t> test_rows;
    std::uint64_t seed = 0;  // seed of the accepted shuffle
    double train_fraction = 0.7;
};

/// Reads a CSV with a header row and a `label` column, reordering columns
/// into the spec's flattening order.
Dataset load_csv(const std::filesystem::path& data_path, const std::filesystem::path& spec_path);
Dataset load_csv(const std::filesystem::path& data_path, const BlockSpec& spec);

/// Writes the dataset as CSV (flattened feature columns then `label`).
/// Values are printed with round-trip precision.
void write_csv(const Dataset& ds, const std::filesystem::path& path);

struct SyntheticConfig {
    BlockSpec spec;
    std::size_t n_samples = 1500;
    int n_informative_per_block = 2;
    int n_informative_singles = 2;
    double noise = 1.0;
    std::uint64_t seed = 0;
    /// Correlation decay between consecutive lags of a block's latent signal.
    double lag_correlation = 0.9;
};

/// Planted-signal generator. Within each block the informative columns are
/// lagged noisy copies of one latent signal; everything else is N(0,1)
/// noise. The label is the sign of a random linear combination of the
/// informative columns plus noise, thresholded at its median.
Dataset generate_synthetic(const SyntheticConfig& config);

/// Flat indices of the informative columns chosen by generate_synthetic
/// for the same config.
std::vector<std::size_t> informative_features(const SyntheticConfig& config);

/// Seeded shuffle then contiguous cut. Retries with seed+1 until both sides
/// hold both classes (100 attempts).
SplitDataset split(const Dataset& ds, double train_fraction, std::uint64_t seed);

}  // namespace ocafs
