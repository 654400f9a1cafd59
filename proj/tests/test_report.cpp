#include "ocafs/report.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace ocafs;
using ocafs::testing::small_config;

namespace {

SelectionResult sample_result() {
    SelectionResult r;
    r.method = "oca";
    r.mask = FeatureMask::from_bitstring("1010");
    r.score = 0.625;
    r.evaluations = 12;
    r.candidates = 15;
    r.sweeps = 2;
    r.k_star = 1;
    r.block_state = SelectionState{{1}, {1, 0}};
    r.block_stop_reason = StopReason::converged;
    r.block_sweeps = 1;
    r.trace = {{Phase::jbest, 0, 3, 0.5, true}, {Phase::flip, 1, 2, 0.625, true}};
    return r;
}

BlockSpec spec_2_2() { return BlockSpec::from_lengths(std::vector<int>{2}, 2); }

}  // namespace

TEST(Report, ResultJsonFields) {
    const auto j = to_json(sample_result(), spec_2_2(), 1.5);
    EXPECT_EQ(j["method"], "oca");
    EXPECT_EQ(j["mask"], "1010");
    EXPECT_EQ(j["selected"], (std::vector<std::string>{"B1_1", "S_1"}));
    EXPECT_EQ(j["selected_count"], 2);
    EXPECT_EQ(j["percent_features"], 50.0);
    EXPECT_EQ(j["evaluations"], 12);
    EXPECT_EQ(j["candidates"], 15);
    EXPECT_EQ(j["k_star"], 1);
    EXPECT_EQ(j["stop_reason"], "converged");
    EXPECT_EQ(j["trace"].size(), 2u);
    EXPECT_EQ(j["trace"][1]["phase"], "flip");
    EXPECT_EQ(j["wall_time_s"], 1.5);
}

TEST(Report, TraceCsv) {
    EXPECT_EQ(trace_csv(sample_result().trace), "step,phase,score,popcount\n0,jbest,0.5,3\n1,flip,0.625,2\n");
}

TEST(Report, StripWallTimeIsRecursive) {
    nlohmann::ordered_json doc = {{"wall_time_s", 1.0},
                                  {"methods", {{{"wall_time_s", 2.0}, {"score", 0.5}}}},
                                  {"nested", {{"inner", {{"wall_time_s", 3.0}}}}}};
    const auto out = strip_wall_time(doc);
    EXPECT_EQ(out.dump(), R"({"methods":[{"score":0.5}],"nested":{"inner":{}}})");
}

TEST(Report, ComparisonJsonAndMarkdown) {
    ComparisonReport rep;
    rep.spec = spec_2_2();
    auto bca = sample_result();
    bca.method = "bca";
    bca.mask = FeatureMask::all(4);
    bca.score = 0.6;
    rep.rows = {{sample_result(), 1.0}, {bca, 2.0}};
    const auto j = rep.to_json();
    EXPECT_EQ(j["schema"], kReportSchema);
    ASSERT_EQ(j["methods"].size(), 2u);
    EXPECT_FALSE(j["methods"][0].contains("trace"));
    EXPECT_EQ(j["settings"]["gbm"]["trees"], 50);
    EXPECT_TRUE(j["settings"]["rfe"]["target"].is_null());
    const std::string md = rep.to_markdown();
    EXPECT_NE(md.find("| Method | OCA using 2 features | BCA using 4 features |"), std::string::npos);
    EXPECT_NE(md.find("| % of features | 50.00 | 100.00 |"), std::string::npos);
    EXPECT_NE(md.find("| Score (in %) | 62.50 | 60.00 |"), std::string::npos);
    EXPECT_NE(md.find("| Evaluations | 12 | 12 |"), std::string::npos);
}

TEST(Report, FingerprintTracksContent) {
    const auto cfg = small_config({3}, 1, 50, 1, 1, 0.5, 1);
    const auto a = fingerprint(generate_synthetic(cfg));
    const auto b = fingerprint(generate_synthetic(cfg));
    EXPECT_EQ(a.sha256, b.sha256);
    EXPECT_EQ(a.sha256.size(), 64u);
    EXPECT_EQ(a.rows, 50u);
    EXPECT_EQ(a.features, 4u);
    auto other = cfg;
    other.seed = 2;
    EXPECT_NE(fingerprint(generate_synthetic(other)).sha256, a.sha256);
}

TEST(Report, FingerprintOfKnownBytes) {
    // sha256 of eight zero bytes (one 0.0 feature) followed by one zero label byte.
    const Dataset ds(BlockSpec::from_lengths(std::vector<int>{}, 1), {0.0}, {0});
    EXPECT_EQ(fingerprint(ds).sha256, "3e7077fd2f66d689e0cee6a7cf5b37bf2dca7c979af356d0a31cbc5c85605c7d");
}

TEST(Report, RescoreReproducesStoredScore) {
    const auto s = split(generate_synthetic(small_config({4}, 2, 200, 1, 1, 0.5, 3)), 0.7, 3);
    const auto out = run_oca(s, GbmConfig{}, OcaConfig{});
    const auto stored = nlohmann::json::parse(to_json(out, s.train.spec(), 0.0).dump());
    EXPECT_EQ(rescore(s, GbmConfig{}, FeatureMask::from_bitstring(stored["mask"])), out.score);
    EXPECT_EQ(stored["score"].get<double>(), out.score);
    EXPECT_EQ(rescore(s, GbmConfig{}, FeatureMask::none(s.train.cols())), 0.0);
}
