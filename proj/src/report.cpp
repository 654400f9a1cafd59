#include "ocafs/report.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace ocafs {

DatasetFingerprint fingerprint(const Dataset& ds) {
    DatasetFingerprint fp;
    fp.rows = ds.rows();
    fp.features = ds.cols();
    fp.blocks = ds.spec().block_count();
    fp.singles = ds.spec().single_count();

    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw std::runtime_error("cannot allocate digest context");
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    const auto& x = ds.features();
    const auto& y = ds.labels();
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, x.data(), x.size() * sizeof(double)) == 1 &&
                    EVP_DigestUpdate(ctx, y.data(), y.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw std::runtime_error("sha256 failed");
    std::ostringstream hex;
    for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    fp.sha256 = hex.str();
    return fp;
}

nlohmann::ordered_json to_json(const DatasetFingerprint& fp) {
    nlohmann::ordered_json j;
    j["rows"] = fp.rows;
    j["features"] = fp.features;
    j["blocks"] = fp.blocks;
    j["singles"] = fp.singles;
    j["sha256"] = fp.sha256;
    return j;
}

nlohmann::ordered_json to_json(const RunSettings& s) {
    nlohmann::ordered_json j;
    j["split_seed"] = s.split_seed;
    j["model_seed"] = s.model_seed;
    j["train_fraction"] = s.train_fraction;
    j["gbm"] = {{"trees", s.gbm.n_trees},
                {"depth", s.gbm.max_depth},
                {"lr", s.gbm.learning_rate},
                {"min_leaf", s.gbm.min_samples_leaf},
                {"seed", s.gbm.seed}};
    j["oca"] = {{"eps1", s.oca.eps1}, {"eps2", s.oca.eps2}, {"itmax1", s.oca.itmax1}, {"itmax2", s.oca.itmax2}};
    if (s.rfe_target_set)
        j["rfe"] = {{"target", s.rfe.n_features_to_select}, {"step", s.rfe.step}};
    else
        j["rfe"] = {{"target", nullptr}, {"step", s.rfe.step}};
    return j;
}

nlohmann::ordered_json to_json(const SelectionResult& r, const BlockSpec& spec, double wall_time_s) {
    nlohmann::ordered_json j;
    j["method"] = r.method;
    j["mask"] = r.mask.to_bitstring();
    j["selected"] = r.mask.selected_names(spec);
    j["selected_count"] = r.mask.popcount();
    j["percent_features"] = popcount_pct(r.mask);
    j["score"] = r.score;
    j["evaluations"] = r.evaluations;
    j["candidates"] = r.candidates;
    j["stop_reason"] = to_string(r.stop_reason);
    j["sweeps"] = r.sweeps;
    if (r.k_star) j["k_star"] = *r.k_star;
    if (r.block_state) {
        j["block_k"] = r.block_state->k;
        j["block_sweeps"] = r.block_sweeps;
        j["block_stop_reason"] = to_string(*r.block_stop_reason);
    }
    if (!r.elimination_order.empty()) {
        const auto names = spec.column_names();
        auto& order = j["elimination_order"] = nlohmann::ordered_json::array();
        for (auto i : r.elimination_order) order.push_back(names[i]);
    }
    j["wall_time_s"] = wall_time_s;
    auto& trace = j["trace"] = nlohmann::ordered_json::array();
    for (const auto& t : r.trace) {
        trace.push_back({{"step", t.step},
                         {"phase", to_string(t.phase)},
                         {"popcount", t.popcount},
                         {"score", t.score},
                         {"accepted", t.accepted}});
    }
    return j;
}

std::string trace_csv(const Trace& trace) {
    std::ostringstream os;
    os << "step,phase,score,popcount\n";
    for (const auto& t : trace) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", t.score);
        os << t.step << ',' << to_string(t.phase) << ',' << buf << ',' << t.popcount << '\n';
    }
    return os.str();
}

nlohmann::ordered_json ComparisonReport::to_json() const {
    nlohmann::ordered_json j;
    j["schema"] = kReportSchema;
    j["dataset"] = ocafs::to_json(dataset);
    j["settings"] = ocafs::to_json(settings);
    auto& methods = j["methods"] = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        auto m = ocafs::to_json(row.result, spec, row.wall_time_s);
        m.erase("trace");
        methods.push_back(std::move(m));
    }
    return j;
}

std::string ComparisonReport::to_markdown() const {
    auto label = [](const SelectionResult& r) {
        std::string name = r.method;
        for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return name + " using " + std::to_string(r.mask.popcount()) + " features";
    };
    std::ostringstream os;
    os << "| Method |";
    for (const auto& row : rows) os << ' ' << label(row.result) << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < rows.size(); ++i) os << "---|";
    os << "\n| % of features |";
    os << std::fixed;
    for (const auto& row : rows) os << ' ' << std::setprecision(2) << popcount_pct(row.result.mask) << " |";
    os << "\n| Score (in %) |";
    for (const auto& row : rows) os << ' ' << std::setprecision(2) << 100.0 * row.result.score << " |";
    os << "\n| Evaluations |";
    for (const auto& row : rows) os << ' ' << row.result.evaluations << " |";
    os << "\n";
    return os.str();
}

nlohmann::ordered_json strip_wall_time(nlohmann::ordered_json doc) {
    if (doc.is_object()) {
        doc.erase("wall_time_s");
        for (auto& item : doc.items()) item.value() = strip_wall_time(item.value());
    } else if (doc.is_array()) {
        for (auto& value : doc) value = strip_wall_time(value);
    }
    return doc;
}

double rescore(const SplitDataset& split, const GbmConfig& gbm, const FeatureMask& mask) {
    if (mask.empty_selection()) return 0.0;
    return score(fit(split.train, mask, gbm), split.test, mask);
}

}  // namespace ocafs
