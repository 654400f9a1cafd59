#include "ocafs/dataset.hpp"

#include "ocafs/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

namespace ocafs {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& raw, std::size_t line_no, const std::string& column) {
    const std::string cell = trim(raw);
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw DataError("line " + std::to_string(line_no) + ": non-numeric value '" + cell +
                        "' in column '" + column + "'");
    }
    return value;
}

}  // namespace

BlockSpec::BlockSpec(std::vector<Block> blocks, std::vector<std::string> singles)
    : blocks_(std::move(blocks)), singles_(std::move(singles)) {
    std::set<std::string> names;
    std::set<std::string> columns;
    offsets_.assign(1, 0);
    for (const auto& block : blocks_) {
        if (block.columns.empty()) throw DataError("block '" + block.name + "' has no columns");
        if (!names.insert(block.name).second)
            throw DataError("duplicate block name '" + block.name + "'");
        for (const auto& c : block.columns) {
            if (!columns.insert(c).second) throw DataError("duplicate column assignment '" + c + "'");
        }
        offsets_.push_back(offsets_.back() + block.columns.size());
    }
    for (const auto& s : singles_) {
        if (names.contains(s)) throw DataError("single '" + s + "' clashes with a block name");
        if (!columns.insert(s).second) throw DataError("duplicate column assignment '" + s + "'");
    }
}

BlockSpec BlockSpec::from_lengths(std::span<const int> lengths, int n_singles) {
    std::vector<Block> blocks;
    for (std::size_t b = 0; b < lengths.size(); ++b) {
        if (lengths[b] < 1) throw DataError("block lengths must be positive");
        Block block{"B" + std::to_string(b + 1), {}};
        for (int j = 0; j < lengths[b]; ++j)
            block.columns.push_back(block.name + "_" + std::to_string(j + 1));
        blocks.push_back(std::move(block));
    }
    if (n_singles < 0) throw DataError("single count must be nonnegative");
    std::vector<std::string> singles;
    for (int j = 0; j < n_singles; ++j) singles.push_back("S_" + std::to_string(j + 1));
    return BlockSpec(std::move(blocks), std::move(singles));
}

BlockSpec BlockSpec::from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("block spec is not valid JSON: ") + e.what());
    }
    std::vector<Block> blocks;
    std::vector<std::string> singles;
    try {
        if (doc.contains("blocks")) {
            for (const auto& b : doc.at("blocks")) {
                blocks.push_back({b.at("name").get<std::string>(),
                                  b.at("columns").get<std::vector<std::string>>()});
            }
        }
        if (doc.contains("singles")) singles = doc.at("singles").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed block spec: ") + e.what());
    }
    return BlockSpec(std::move(blocks), std::move(singles));
}

BlockSpec BlockSpec::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open block spec '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string BlockSpec::to_json_text() const {
    nlohmann::ordered_json doc;
    doc["blocks"] = nlohmann::ordered_json::array();
    for (const auto& b : blocks_) {
        nlohmann::ordered_json jb;
        jb["name"] = b.name;
        jb["columns"] = b.columns;
        doc["blocks"].push_back(std::move(jb));
    }
    doc["singles"] = singles_;
    return doc.dump(2) + "\n";
}

std::size_t BlockSpec::min_block_length() const {
    std::size_t m = 0;
    for (std::size_t b = 0; b < blocks_.size(); ++b)
        m = (b == 0) ? block_length(b) : std::min(m, block_length(b));
    return m;
}

std::vector<std::string> BlockSpec::column_names() const {
    std::vector<std::string> names;
    names.reserve(feature_count());
    for (const auto& b : blocks_) names.insert(names.end(), b.columns.begin(), b.columns.end());
    names.insert(names.end(), singles_.begin(), singles_.end());
    return names;
}

Dataset::Dataset(BlockSpec spec, std::vector<double> features, std::vector<std::uint8_t> labels)
    : spec_(std::move(spec)), features_(std::move(features)), labels_(std::move(labels)) {
    if (spec_.feature_count() == 0) throw DataError("dataset has zero features");
    if (features_.size() != labels_.size() * spec_.feature_count())
        throw DataError("feature matrix shape does not match the block spec");
    for (auto y : labels_)
        if (y > 1) throw DataError("labels must be 0 or 1");
}

std::size_t Dataset::positives() const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 1));
}

Dataset Dataset::subset(std::span<const std::size_t> row_ids) const {
    std::vector<double> f;
    std::vector<std::uint8_t> y;
    f.reserve(row_ids.size() * cols());
    y.reserve(row_ids.size());
    for (auto r : row_ids) {
        auto src = row(r);
        f.insert(f.end(), src.begin(), src.end());
        y.push_back(labels_[r]);
    }
    return Dataset(spec_, std::move(f), std::move(y));
}

Dataset load_csv(const std::filesystem::path& data_path, const std::filesystem::path& spec_path) {
    return load_csv(data_path, BlockSpec::from_json_file(spec_path));
}

Dataset load_csv(const std::filesystem::path& data_path, const BlockSpec& spec) {
    std::ifstream in(data_path);
    if (!in) throw DataError("cannot open data file '" + data_path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("data file is empty");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    std::vector<std::string> header = split_csv_line(line);
    for (auto& h : header) h = trim(h);

    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!position.emplace(header[i], i).second)
            throw DataError("duplicate CSV column '" + header[i] + "'");
    }
    auto label_it = position.find("label");
    if (label_it == position.end()) throw DataError("CSV has no 'label' column");
    if (spec.feature_count() == 0) throw DataError("dataset has zero features");

    const auto names = spec.column_names();
    std::vector<std::size_t> source;  // flat feature index -> CSV column
    source.reserve(names.size());
    for (const auto& name : names) {
        auto it = position.find(name);
        if (it == position.end()) throw DataError("column '" + name + "' named in spec is missing from CSV");
        if (it->second == label_it->second) throw DataError("'label' cannot be a feature column");
        source.push_back(it->second);
    }
    if (names.size() + 1 != header.size()) {
        std::set<std::string> assigned(names.begin(), names.end());
        for (const auto& h : header) {
            if (h != "label" && !assigned.contains(h))
                throw DataError("CSV column '" + h + "' is not assigned in the block spec");
        }
    }

    std::vector<double> features;
    std::vector<std::uint8_t> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
        for (std::size_t j = 0; j < source.size(); ++j)
            features.push_back(parse_number(cells[source[j]], line_no, names[j]));
        const double y = parse_number(cells[label_it->second], line_no, "label");
        if (y != 0.0 && y != 1.0)
            throw DataError("line " + std::to_string(line_no) + ": label must be 0 or 1");
        labels.push_back(static_cast<std::uint8_t>(y));
    }
    return Dataset(spec, std::move(features), std::move(labels));
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    for (const auto& name : ds.spec().column_names()) out << name << ',';
    out << "label\n";
    char buf[64];
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        for (double v : ds.row(r)) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
            out.write(buf, ptr - buf);
            out << ',';
        }
        out << static_cast<int>(ds.labels()[r]) << '\n';
    }
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

namespace {

struct SyntheticPlan {
    std::vector<std::vector<std::size_t>> block_informative;  // per block, flat index in lag order
    std::vector<std::size_t> single_informative;
};

SyntheticPlan make_plan(const SyntheticConfig& config) {
    const BlockSpec& spec = config.spec;
    if (config.n_samples < 10) throw DataError("synthetic data needs at least 10 samples");
    if (config.n_informative_per_block < 0 || config.n_informative_singles < 0)
        throw DataError("informative counts must be nonnegative");
    if (spec.block_count() > 0 &&
        static_cast<std::size_t>(config.n_informative_per_block) > spec.min_block_length())
        throw DataError("n_informative_per_block exceeds the shortest block");
    if (static_cast<std::size_t>(config.n_informative_singles) > spec.single_count())
        throw DataError("n_informative_singles exceeds the single count");
    if (config.noise < 0.0) throw DataError("noise must be nonnegative");

    std::mt19937_64 rng(config.seed * 0x9E3779B97F4A7C15ULL + 0x51);
    SyntheticPlan plan;
    for (std::size_t b = 0; b < spec.block_count(); ++b) {
        std::vector<std::size_t> cols(spec.block_length(b));
        std::iota(cols.begin(), cols.end(), spec.block_offset(b));
        std::shuffle(cols.begin(), cols.end(), rng);
        cols.resize(static_cast<std::size_t>(config.n_informative_per_block));
        plan.block_informative.push_back(std::move(cols));
    }
    std::vector<std::size_t> singles(spec.single_count());
    std::iota(singles.begin(), singles.end(), spec.singles_offset());
    std::shuffle(singles.begin(), singles.end(), rng);
    singles.resize(static_cast<std::size_t>(config.n_informative_singles));
    std::sort(singles.begin(), singles.end());
    plan.single_informative = std::move(singles);
    return plan;
}

}  // namespace

std::vector<std::size_t> informative_features(const SyntheticConfig& config) {
    auto plan = make_plan(config);
    std::vector<std::size_t> out;
    for (const auto& b : plan.block_informative) out.insert(out.end(), b.begin(), b.end());
    out.insert(out.end(), plan.single_informative.begin(), plan.single_informative.end());
    std::sort(out.begin(), out.end());
    return out;
}

Dataset generate_synthetic(const SyntheticConfig& config) {
    const SyntheticPlan plan = make_plan(config);
    const BlockSpec& spec = config.spec;
    const std::size_t n = config.n_samples;
    const std::size_t m = spec.feature_count();
    if (m == 0) throw DataError("dataset has zero features");

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> magnitude(0.5, 1.5);
    std::bernoulli_distribution coin(0.5);

    std::vector<double> features(n * m);
    for (auto& v : features) v = gauss(rng);

    std::vector<std::pair<std::size_t, double>> weights;
    const double rho = config.lag_correlation;
    for (const auto& cols : plan.block_informative) {
        std::vector<double> latent(n);
        for (auto& u : latent) u = gauss(rng);
        for (std::size_t lag = 0; lag < cols.size(); ++lag) {
            const double keep = std::pow(rho, static_cast<double>(lag));
            const double fresh = std::sqrt(std::max(0.0, 1.0 - keep * keep));
            for (std::size_t r = 0; r < n; ++r) {
                double& x = features[r * m + cols[lag]];
                x = keep * latent[r] + fresh * x;
            }
            weights.emplace_back(cols[lag], (coin(rng) ? 1.0 : -1.0) * magnitude(rng));
        }
    }
    for (auto c : plan.single_informative)
        weights.emplace_back(c, (coin(rng) ? 1.0 : -1.0) * magnitude(rng));

    std::vector<double> z(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (const auto& [c, w] : weights) z[r] += w * features[r * m + c];
        z[r] += config.noise * gauss(rng);
    }
    std::vector<double> sorted = z;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 2), sorted.end());
    const double threshold = sorted[n / 2];

    std::vector<std::uint8_t> labels(n);
    for (std::size_t r = 0; r < n; ++r) labels[r] = z[r] >= threshold ? 1 : 0;
    Dataset ds(spec, std::move(features), std::move(labels));
    const double balance = static_cast<double>(ds.positives()) / static_cast<double>(n);
    if (balance < 0.4 || balance > 0.6)
        throw DataError("synthetic labels are degenerate (no signal and zero noise?)");
    return ds;
}

SplitDataset split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw DataError("train fraction must lie in (0, 1)");
    const std::size_t total = ds.rows();
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(total)));
    if (n_train == 0 || n_train >= total)
        throw DataError("not enough rows for a non-empty train/test split");

    std::vector<std::size_t> order(total);
    for (int attempt = 0; attempt < 100; ++attempt) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(s);
        std::shuffle(order.begin(), order.end(), rng);
        auto has_both = [&](std::size_t begin, std::size_t end) {
            bool zero = false, one = false;
            for (std::size_t i = begin; i < end; ++i) (ds.labels()[order[i]] ? one : zero) = true;
            return zero && one;
        };
        if (!has_both(0, n_train) || !has_both(n_train, total)) continue;
        SplitDataset out;
        out.train_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.test_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
        out.train = ds.subset(out.train_rows);
        out.test = ds.subset(out.test_rows);
        out.seed = s;
        out.train_fraction = train_fraction;
        return out;
    }
    throw DataError("cannot place both classes on both sides of the split after 100 attempts");
}

}  // namespace ocafs
