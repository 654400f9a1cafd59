// Command-line driver: synthetic data generation, feature selection runs,
// method comparisons and the coordinate-descent convergence battery.

#include "ocafs/baselines.hpp"
#include "ocafs/convergence_lab.hpp"
#include "ocafs/dataset.hpp"
#include "ocafs/errors.hpp"
#include "ocafs/oca.hpp"
#include "ocafs/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace ocafs;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<int> parse_int_list(const std::string& text, const char* what) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw UsageError(std::string("invalid ") + what + " list '" + text + "'");
        }
    }
    if (out.empty()) throw UsageError(std::string("empty ") + what + " list");
    return out;
}

// "10..40" (step 1, descending order) or "40,30,20".
std::vector<std::size_t> parse_targets(const std::string& text) {
    std::vector<std::size_t> out;
    if (auto dots = text.find(".."); dots != std::string::npos) {
        const auto range = parse_int_list(text.substr(0, dots) + "," + text.substr(dots + 2), "target");
        if (range.size() != 2 || range[0] < 1 || range[1] < range[0]) throw UsageError("invalid target range '" + text + "'");
        for (int t = range[1]; t >= range[0]; --t) out.push_back(static_cast<std::size_t>(t));
        return out;
    }
    for (int t : parse_int_list(text, "target")) {
        if (t < 1) throw UsageError("RFE targets must be positive");
        out.push_back(static_cast<std::size_t>(t));
    }
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct SelectionFlags {
    std::string data;
    std::string spec;
    std::uint64_t seed = 42;
    std::optional<std::uint64_t> split_seed;
    std::optional<std::uint64_t> model_seed;
    double train_frac = 0.7;
    GbmConfig gbm;
    OcaConfig oca;
    std::optional<std::size_t> rfe_target;
    std::size_t rfe_step = 1;
    std::string rfe_targets;
    std::string out = "out";
    unsigned threads = 1;
};

void add_selection_flags(CLI::App* cmd, SelectionFlags& f) {
    cmd->add_option("--data", f.data, "CSV file with a `label` column")->required();
    cmd->add_option("--spec", f.spec, "Block spec JSON")->required();
    cmd->add_option("--seed", f.seed, "Base seed; split and model seeds default to it");
    cmd->add_option("--split-seed", f.split_seed, "Train/test shuffle seed");
    cmd->add_option("--model-seed", f.model_seed, "GBM seed");
    cmd->add_option("--train-frac", f.train_frac, "Training fraction")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--trees", f.gbm.n_trees, "Boosting rounds");
    cmd->add_option("--depth", f.gbm.max_depth, "Maximum tree depth");
    cmd->add_option("--lr", f.gbm.learning_rate, "Learning rate");
    cmd->add_option("--min-leaf", f.gbm.min_samples_leaf, "Minimum samples per leaf");
    cmd->add_option("--eps1", f.oca.eps1, "Block-phase stopping tolerance");
    cmd->add_option("--eps2", f.oca.eps2, "Flip-phase stopping tolerance (also BCA)");
    cmd->add_option("--itmax1", f.oca.itmax1, "Block-phase sweep cap");
    cmd->add_option("--itmax2", f.oca.itmax2, "Flip-phase sweep cap (also BCA)");
    cmd->add_option("--rfe-target", f.rfe_target, "Number of features RFE keeps");
    cmd->add_option("--rfe-step", f.rfe_step, "Features removed per RFE round");
    cmd->add_option("--threads", f.threads, "Worker threads for candidate scoring");
    cmd->add_option("--out", f.out, "Output directory");
}

RunSettings settings_from(const SelectionFlags& f) {
    RunSettings s;
    s.split_seed = f.split_seed.value_or(f.seed);
    s.model_seed = f.model_seed.value_or(f.seed);
    s.train_fraction = f.train_frac;
    s.gbm = f.gbm;
    s.gbm.seed = s.model_seed;
    s.oca = f.oca;
    s.rfe.step = f.rfe_step;
    if (f.rfe_target) {
        s.rfe.n_features_to_select = *f.rfe_target;
        s.rfe_target_set = true;
    }
    s.gbm.validate();
    s.oca.validate();
    return s;
}

SelectionResult run_method(const std::string& method, const SplitDataset& split, const RunSettings& s,
                           unsigned threads) {
    if (method == "oca") return run_oca(split, s.gbm, s.oca, threads);
    if (method == "bca") {
        SubsetScorer scorer(split, s.gbm);
        scorer.set_threads(threads);
        return run_bca(scorer, s.oca.eps2, s.oca.itmax2);
    }
    if (method == "rfe") {
        if (!s.rfe_target_set)
            throw UsageError("RFE requires the number of features to keep: pass --rfe-target");
        return run_rfe(split, s.gbm, s.rfe);
    }
    throw UsageError("unknown method '" + method + "' (expected oca, bca or rfe)");
}

int cmd_generate(const std::string& blocks, int singles, std::size_t samples, std::uint64_t seed,
                 std::optional<int> informative, std::optional<int> informative_singles, double noise,
                 const std::string& out) {
    SyntheticConfig cfg;
    const auto lengths = blocks.empty() ? std::vector<int>{} : parse_int_list(blocks, "block");
    for (int l : lengths)
        if (l < 1) throw UsageError("block lengths must be positive");
    cfg.spec = BlockSpec::from_lengths(lengths, singles);
    cfg.n_samples = samples;
    cfg.seed = seed;
    // Defaults shrink to fit small layouts; explicit values are validated as given.
    const int shortest = lengths.empty() ? 0 : *std::min_element(lengths.begin(), lengths.end());
    cfg.n_informative_per_block = informative.value_or(std::min(2, shortest));
    cfg.n_informative_singles = informative_singles.value_or(std::min(2, singles));
    cfg.noise = noise;
    const Dataset ds = generate_synthetic(cfg);
    fs::create_directories(out);
    write_csv(ds, fs::path(out) / "data.csv");
    write_text(fs::path(out) / "spec.json", cfg.spec.to_json_text());
    std::cout << "wrote " << ds.rows() << "x" << ds.cols() + 1 << " to " << (fs::path(out) / "data.csv").string()
              << "\n";
    return 0;
}

int cmd_select(const SelectionFlags& f, const std::string& method) {
    const RunSettings s = settings_from(f);
    const Dataset ds = load_csv(f.data, f.spec);
    fs::create_directories(f.out);
    if (method == "rfe" && !f.rfe_targets.empty()) {
        const auto targets = parse_targets(f.rfe_targets);
        const SplitDataset split = ocafs::split(ds, s.train_fraction, s.split_seed);
        const auto start = std::chrono::steady_clock::now();
        const auto curve = rfe_sweep(split, s.gbm, targets, s.rfe.step);
        const double wall = seconds_since(start);
        nlohmann::ordered_json doc;
        doc["schema"] = kReportSchema;
        doc["dataset"] = to_json(fingerprint(ds));
        doc["settings"] = to_json(s);
        doc["wall_time_s"] = wall;
        auto& points = doc["curve"] = nlohmann::ordered_json::array();
        std::string csv = "target,percent_features,score,evaluations\n";
        for (const auto& [t, r] : curve) {
            auto j = to_json(r, ds.spec(), 0.0);
            j.erase("trace");
            j.erase("wall_time_s");
            j["target"] = t;
            points.push_back(std::move(j));
            char buf[96];
            std::snprintf(buf, sizeof buf, "%zu,%.6f,%.17g,%zu\n", t, popcount_pct(r.mask), r.score, r.evaluations);
            csv += buf;
        }
        write_text(fs::path(f.out) / "rfe_sweep.json", doc.dump(2) + "\n");
        write_text(fs::path(f.out) / "rfe_sweep.csv", csv);
        std::cout << "rfe sweep over " << targets.size() << " targets written to " << f.out << "\n";
        return 0;
    }
    if (method == "rfe" && !s.rfe_target_set)
        throw UsageError("RFE requires the number of features to keep: pass --rfe-target");
    const SplitDataset split = ocafs::split(ds, s.train_fraction, s.split_seed);
    const auto start = std::chrono::steady_clock::now();
    const SelectionResult r = run_method(method, split, s, f.threads);
    const double wall = seconds_since(start);

    nlohmann::ordered_json doc;
    doc["schema"] = kReportSchema;
    doc["dataset"] = to_json(fingerprint(ds));
    doc["settings"] = to_json(s);
    doc["result"] = to_json(r, ds.spec(), wall);
    write_text(fs::path(f.out) / "result.json", doc.dump(2) + "\n");
    write_text(fs::path(f.out) / "trace.csv", trace_csv(r.trace));
    std::printf("%s: %zu/%zu features, score %.4f, %zu evaluations, %s\n", method.c_str(), r.mask.popcount(),
                r.mask.size(), r.score, r.evaluations, to_string(r.stop_reason).c_str());
    return 0;
}

int cmd_compare(const SelectionFlags& f, const std::string& methods) {
    const RunSettings s = settings_from(f);
    std::vector<std::string> names;
    {
        std::stringstream ss(methods);
        std::string m;
        while (std::getline(ss, m, ',')) names.push_back(m);
    }
    if (names.empty()) throw UsageError("no methods given");
    for (const auto& m : names) {
        if (m != "oca" && m != "bca" && m != "rfe") throw UsageError("unknown method '" + m + "'");
        if (m == "rfe" && !s.rfe_target_set)
            throw UsageError("RFE requires the number of features to keep: pass --rfe-target");
    }
    const Dataset ds = load_csv(f.data, f.spec);
    const SplitDataset split = ocafs::split(ds, s.train_fraction, s.split_seed);
    ComparisonReport report{fingerprint(ds), s, ds.spec(), {}};
    fs::create_directories(f.out);
    for (const auto& m : names) {
        const auto start = std::chrono::steady_clock::now();
        SelectionResult r = run_method(m, split, s, f.threads);
        const double wall = seconds_since(start);
        write_text(fs::path(f.out) / ("trace_" + m + ".csv"), trace_csv(r.trace));
        report.rows.push_back({std::move(r), wall});
    }
    write_text(fs::path(f.out) / "comparison.json", report.to_json().dump(2) + "\n");
    const std::string md = report.to_markdown();
    write_text(fs::path(f.out) / "comparison.md", md);
    std::cout << md;
    return 0;
}

struct ConvergenceFlags {
    std::vector<int> dims;
    std::vector<double> conds;
    std::size_t runs = 100;
    std::size_t steps = 2000;
    std::uint64_t seed = 7;
    bool bad_step = false;
    std::string out = "out";
};

int cmd_convergence(const ConvergenceFlags& f) {
    const std::vector<int> dims = f.dims.empty() ? std::vector<int>{2, 20} : f.dims;
    const std::vector<double> conds = f.conds.empty() ? std::vector<double>{10.0, 100.0} : f.conds;
    const double step_scale = f.bad_step ? 2.0 : 1.0;
    fs::create_directories(f.out);
    nlohmann::ordered_json summary;
    summary["schema"] = kReportSchema;
    summary["runs"] = f.runs;
    summary["steps"] = f.steps;
    summary["seed"] = f.seed;
    summary["step_scale"] = step_scale;
    auto& problems = summary["problems"] = nlohmann::ordered_json::array();
    bool all_ok = true;

    for (int n : dims) {
        for (double cond : conds) {
            const auto p = lab::make_quadratic(n, cond, f.seed + static_cast<std::uint64_t>(n));
            const auto sub = lab::check_sublinear_bound(p, f.steps, f.runs, f.seed, 0.05, step_scale);
            const auto lin = lab::check_linear_bound(p, f.steps, f.runs, f.seed, 0.05, step_scale);
            const double grad_err = lab::gradient_check(p, 10, f.seed);
            const bool grad_ok = grad_err < 1e-6;
            std::ostringstream csv;
            csv << "k,mean_gap,bound_sublinear,bound_linear\n";
            char buf[128];
            for (std::size_t k = 0; k <= f.steps; ++k) {
                const double bs = k == 0 ? INFINITY : sub.limit[k];
                std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", k, sub.mean_gap[k], bs, lin.limit[k]);
                csv << buf;
            }
            std::ostringstream name;
            name << "convergence_n" << n << "_cond" << cond << ".csv";
            write_text(fs::path(f.out) / name.str(), csv.str());

            nlohmann::ordered_json j;
            j["dim"] = n;
            j["cond"] = cond;
            j["sigma"] = p.sigma;
            j["l_max"] = p.l_max;
            j["r0"] = p.r0;
            j["rate_factor"] = lab::linear_rate_factor(p);
            j["sublinear"] = {{"holds", sub.holds}, {"max_ratio", sub.max_ratio}, {"worst_k", sub.worst_k},
                              {"descent", sub.descent}, {"contained", sub.contained}};
            j["linear"] = {{"holds", lin.holds}, {"max_ratio", lin.max_ratio}, {"worst_k", lin.worst_k},
                           {"descent", lin.descent}, {"contained", lin.contained}};
            j["gradient_check_rel_err"] = grad_err;
            if (n == 1 && f.steps >= 1) {
                const auto t = lab::rcd_run(p, 1, f.seed, step_scale);
                j["one_step_exact"] = t.gap[1] == 0.0;
                std::printf("n=1: gap after one step %.3g (%s)\n", t.gap[1],
                            t.gap[1] == 0.0 ? "exact one-step convergence" : "not exact");
            }
            problems.push_back(j);
            std::printf("n=%d cond=%g: %s; %s\n", n, cond, sub.summary().c_str(), lin.summary().c_str());
            all_ok = all_ok && sub.holds && lin.holds && grad_ok;
        }
    }

    auto& lemma = summary["lemma1"] = nlohmann::ordered_json::array();
    for (double a : {0.5, 1.0, 2.0}) {
        const auto r = lab::lemma1_check(a, 1.0 / (4.0 * a), 10000);
        lemma.push_back({{"a", a}, {"holds", r.holds}, {"max_ratio", r.max_ratio}});
        std::printf("lemma a=%g: %s (max u_n*n*a = %.4f)\n", a, r.holds ? "holds" : "FAILS", r.max_ratio);
        all_ok = all_ok && r.holds && r.non_increasing && r.nonnegative;
    }
    summary["pass"] = all_ok;
    write_text(fs::path(f.out) / "convergence_summary.json", summary.dump(2) + "\n");
    if (!all_ok) throw BoundViolation("convergence checks failed (see convergence_summary.json)");
    std::printf("all convergence checks pass\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Block-aware wrapper feature selection (OCA, BCA, RFE) and coordinate-descent checks"};
    app.require_subcommand(1);

    std::string blocks = "20,20,20,20,20,30";
    int singles = 5;
    std::size_t samples = 1500;
    std::uint64_t data_seed = 0;
    std::optional<int> informative;
    std::optional<int> informative_singles;
    double noise = 1.0;
    std::string gen_out = "data";
    auto* gen = app.add_subcommand("generate", "Write a synthetic block-structured dataset");
    gen->add_option("--blocks", blocks, "Comma-separated block lengths");
    gen->add_option("--singles", singles, "Number of single variables")->check(CLI::NonNegativeNumber);
    gen->add_option("--samples", samples, "Number of rows");
    gen->add_option("--seed", data_seed, "Data seed");
    gen->add_option("--informative", informative, "Informative columns per block (default 2)");
    gen->add_option("--informative-singles", informative_singles, "Informative single variables (default 2)");
    gen->add_option("--noise", noise, "Label noise scale");
    gen->add_option("--out", gen_out, "Output directory (data.csv, spec.json)");

    SelectionFlags sel;
    std::string method = "oca";
    auto* select = app.add_subcommand("select", "Run one selection method");
    add_selection_flags(select, sel);
    select->add_option("--method", method, "oca | bca | rfe");
    select->add_option("--rfe-targets", sel.rfe_targets, "RFE sweep targets, e.g. 10..40");

    SelectionFlags cmp;
    std::string methods = "oca,bca";
    auto* compare = app.add_subcommand("compare", "Run several methods on one shared split");
    add_selection_flags(compare, cmp);
    compare->add_option("--methods", methods, "Comma-separated methods");

    ConvergenceFlags conv;
    auto* convergence = app.add_subcommand("convergence", "Randomized coordinate descent bound checks");
    convergence->add_option("--dim", conv.dims, "Problem dimensions (default 2 20)");
    convergence->add_option("--cond", conv.conds, "Condition numbers (default 10 100)");
    convergence->add_option("--runs", conv.runs, "Monte Carlo runs per problem");
    convergence->add_option("--steps", conv.steps, "Steps per run");
    convergence->add_option("--seed", conv.seed, "Seed");
    convergence->add_flag("--bad-step", conv.bad_step, "Use step 2/L_max (fault injection)");
    convergence->add_option("--out", conv.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*gen) return cmd_generate(blocks, singles, samples, data_seed, informative, informative_singles, noise, gen_out);
        if (*select) return cmd_select(sel, method);
        if (*compare) return cmd_compare(cmp, methods);
        if (*convergence) return cmd_convergence(conv);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const BoundViolation& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
