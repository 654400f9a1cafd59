#pragma once

#include "ocafs/baselines.hpp"
#include "ocafs/dataset.hpp"
#include "ocafs/oca.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace ocafs {

inline constexpr int kReportSchema = 1;

/// Every knob that influences a selection run, echoed into reports.
struct RunSettings {
    std::uint64_t split_seed = 0;
    std::uint64_t model_seed = 0;
    double train_fraction = 0.7;
    GbmConfig gbm;
    OcaConfig oca;
    RfeConfig rfe;
    bool rfe_target_set = false;
};

struct DatasetFingerprint {
    std::size_t rows = 0;
    std::size_t features = 0;
    std::size_t blocks = 0;
    std::size_t singles = 0;
    std::string sha256;  // over the feature matrix and labels
};

DatasetFingerprint fingerprint(const Dataset& ds);

nlohmann::ordered_json to_json(const DatasetFingerprint& fp);
nlohmann::ordered_json to_json(const RunSettings& settings);
/// Mask as bit-string plus selected column names; trace as an array.
nlohmann::ordered_json to_json(const SelectionResult& result, const BlockSpec& spec, double wall_time_s);

/// CSV with header `step,phase,score,popcount`.
std::string trace_csv(const Trace& trace);

struct ComparisonRow {
    SelectionResult result;
    double wall_time_s = 0.0;
};

struct ComparisonReport {
    DatasetFingerprint dataset;
    RunSettings settings;
    BlockSpec spec;
    std::vector<ComparisonRow> rows;

    nlohmann::ordered_json to_json() const;
    /// One column per method, rows `% of features` and `Score (in %)`.
    std::string to_markdown() const;
};

/// Removes every "wall_time_s" member, recursively.
nlohmann::ordered_json strip_wall_time(nlohmann::ordered_json doc);

/// Re-fits a stored mask under the stored settings and returns its score.
double rescore(const SplitDataset& split, const GbmConfig& gbm, const FeatureMask& mask);

}  // namespace ocafs
