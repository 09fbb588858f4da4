#include "dsos/baselines.hpp"
#include "dsos/bench.hpp"
#include "dsos/csv.hpp"
#include "dsos/forest.hpp"
#include "dsos/report.hpp"
#include "dsos/rng.hpp"
#include "dsos/scorer.hpp"
#include "dsos/shift_tests.hpp"
#include "dsos/simgen.hpp"
#include "dsos/wauc.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace dsos;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAdverseShift = 3;

struct DataFlags {
    std::string train_path, test_path;
    std::string data_path, origin_column;
    std::string label_column;
    bool one_hot = false;
    std::string preset; // random | stratified | in-distribution | out-of-distribution
};

struct ForestFlags {
    std::size_t trees = 500;
    std::size_t min_node = 0;
    std::size_t mtry = 0;
    std::size_t subsample = 0;

    ForestHyperparams to_hyperparams() const {
        ForestHyperparams hp;
        hp.n_trees = trees;
        hp.min_node_size = min_node;
        hp.mtry = mtry;
        hp.subsample_size = subsample;
        return hp;
    }
};

void add_data_flags(CLI::App* cmd, DataFlags& flags, bool with_preset) {
    cmd->add_option("--train", flags.train_path, "training-sample CSV (two-file mode)");
    cmd->add_option("--test", flags.test_path, "test-sample CSV (two-file mode)");
    cmd->add_option("--data", flags.data_path, "pooled CSV (single-file mode)");
    cmd->add_option("--origin-column", flags.origin_column,
                    "column assigning rows to train/test (single-file mode)");
    cmd->add_option("--label", flags.label_column, "label column for supervised scorers");
    cmd->add_flag("--one-hot", flags.one_hot, "one-hot encode non-numeric feature columns");
    if (with_preset)
        cmd->add_option("--preset", flags.preset,
                        "derive origins from a split preset: random, stratified, "
                        "in-distribution, out-of-distribution (single-file mode)")
            ->check(CLI::IsMember({"random", "stratified", "in-distribution",
                                   "out-of-distribution"}));
}

void add_forest_flags(CLI::App* cmd, ForestFlags& flags) {
    cmd->add_option("--trees", flags.trees, "trees per forest")->capture_default_str();
    cmd->add_option("--min-node", flags.min_node,
                    "terminal node size (0 = kind default: 10 classification, 5 regression)");
    cmd->add_option("--mtry", flags.mtry, "features per split (0 = kind default)");
    cmd->add_option("--subsample", flags.subsample,
                    "isolation subsample size (0 = min(256, n))");
}

// Origins from a named split preset; test fraction 1/3 throughout.
std::vector<Origin> preset_origins(const Dataset& data, const std::string& preset,
                                   std::uint64_t seed) {
    const std::size_t n = data.n_rows();
    const std::size_t n_test = (n + 2) / 3;
    std::vector<Origin> origin(n, Origin::train);

    if (preset == "random") {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        Rng rng = Rng::derive(seed, 11);
        rng.shuffle(idx);
        for (std::size_t i = n - n_test; i < n; ++i) origin[idx[i]] = Origin::test;
        return origin;
    }
    if (preset == "stratified") {
        if (!data.label || data.label->kind != LabelKind::categorical)
            throw std::runtime_error("stratified preset needs a categorical --label column");
        for (std::size_t c = 0; c < data.label->n_classes(); ++c) {
            std::vector<std::size_t> members;
            for (std::size_t r = 0; r < n; ++r)
                if (data.label->values[r] == static_cast<double>(c)) members.push_back(r);
            Rng rng = Rng::derive(seed, 100 + c);
            rng.shuffle(members);
            const std::size_t keep = (2 * members.size()) / 3;
            for (std::size_t i = keep; i < members.size(); ++i) origin[members[i]] = Origin::test;
        }
        return origin;
    }
    // in/out-of-distribution: isolation-score quantiles at a fixed seed, so the
    // preset names a reproducible split independent of --seed.
    ForestHyperparams hp;
    const auto model = fit_isolation_forest(data.features, hp, 7);
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(n);
    for (std::size_t r = 0; r < n; ++r)
        scored.push_back({score_isolation(model, data.features.row(r)), r});
    std::sort(scored.begin(), scored.end());
    if (preset == "in-distribution")
        for (std::size_t i = 0; i < n_test; ++i) origin[scored[i].second] = Origin::test;
    else
        for (std::size_t i = n - n_test; i < n; ++i) origin[scored[i].second] = Origin::test;
    return origin;
}

IngestResult load_dataset(const DataFlags& flags, std::uint64_t seed) {
    IngestOptions options;
    if (!flags.label_column.empty()) options.label_column = flags.label_column;
    options.one_hot = flags.one_hot;

    const bool two_file = !flags.train_path.empty() || !flags.test_path.empty();
    const bool single = !flags.data_path.empty();
    if (two_file == single)
        throw std::runtime_error("pass either --train/--test or --data");

    if (two_file) {
        if (flags.train_path.empty() || flags.test_path.empty())
            throw std::runtime_error("two-file mode needs both --train and --test");
        if (!flags.preset.empty())
            throw std::runtime_error("--preset applies to single-file mode only");
        return ingest_csv_pair(flags.train_path, flags.test_path, options);
    }

    if (!flags.preset.empty()) {
        if (!flags.origin_column.empty())
            throw std::runtime_error("--preset and --origin-column are mutually exclusive");
        IngestResult result = ingest_csv_presplit(flags.data_path, options);
        result.dataset.origin = preset_origins(result.dataset, flags.preset, seed);
        result.dataset.validate();
        return result;
    }
    if (flags.origin_column.empty())
        throw std::runtime_error("single-file mode needs --origin-column or --preset");
    options.origin_column = flags.origin_column;
    return ingest_csv(flags.data_path, options);
}

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

void emit_report(const TestReport& report, const std::string& out_path) {
    const std::string json = report_to_json(report);
    std::fputs(json.c_str(), stdout);
    if (!out_path.empty()) write_text_atomic(out_path, json);
}

int run_test_command(const DataFlags& data_flags, const ForestFlags& forest_flags,
                     const std::string& method_name_flag, const std::string& scorer_name,
                     std::size_t permutations, bool sequential, bool paper_exact,
                     bool permute_scores_only, double calibration_fraction, std::uint64_t seed,
                     double alpha, const std::string& out_path) {
    const Notion notion = notion_from_name(scorer_name);
    if (notion_needs_label(notion) && data_flags.label_column.empty())
        throw std::runtime_error("--scorer " + scorer_name + " needs --label");

    const IngestResult loaded = load_dataset(data_flags, seed);
    const Dataset& data = loaded.dataset;

    ScorerConfig scorer{notion, forest_flags.to_hyperparams(), seed};

    WaucResult result;
    if (method_name_flag == "pt") {
        PermutationPlan plan;
        plan.max_permutations = permutations;
        plan.sequential = sequential;
        plan.seq_boundary.alpha = alpha;
        plan.paper_exact_pvalue = paper_exact;
        plan.permute_scores_only = permute_scores_only;
        plan.seed = seed;
        result = dsos_pt(data, scorer, plan);
    } else if (method_name_flag == "ss") {
        SplitPlan plan;
        plan.calibration_fraction = calibration_fraction;
        plan.seed = seed;
        result = dsos_ss(data, scorer, plan);
    } else {
        result = dsos_at(data, scorer, seed);
    }

    TestReport report;
    report.command = "test";
    report.data = fingerprint(data);
    report.alpha = alpha;
    const bool reject = alpha > 0.0 && result.p_value <= alpha;
    report.verdict = reject ? "adverse-shift" : "no-adverse-shift";
    ReportEntry entry = entry_from_result(result);
    entry.notion = scorer_name;
    report.results.push_back(entry);
    report.params = {{"method", method_name_flag},
                     {"scorer", scorer_name},
                     {"seed", std::to_string(seed)},
                     {"alpha", format_double(alpha)},
                     {"trees", std::to_string(forest_flags.trees)},
                     {"one_hot", data_flags.one_hot ? "true" : "false"}};
    if (method_name_flag == "pt") {
        report.params["permutations"] = std::to_string(permutations);
        report.params["sequential"] = sequential ? "true" : "false";
        report.params["paper_exact_pvalue"] = paper_exact ? "true" : "false";
    }
    if (method_name_flag == "ss")
        report.params["calibration_fraction"] = format_double(calibration_fraction);
    if (!data_flags.preset.empty()) report.params["preset"] = data_flags.preset;

    emit_report(report, out_path);
    return reject ? kExitAdverseShift : kExitOk;
}

int run_panel_command(const DataFlags& data_flags, const ForestFlags& forest_flags,
                      const std::string& method_name_flag, std::vector<std::string> notion_names,
                      std::size_t permutations, double calibration_fraction, std::uint64_t seed,
                      double alpha, const std::string& out_path, const std::string& plot_path) {
    const IngestResult loaded = load_dataset(data_flags, seed);
    const Dataset& data = loaded.dataset;

    if (notion_names.empty()) {
        if (data.label) {
            notion_names = {"two-sample", "anomaly", "residual", "uncertainty"};
        } else {
            notion_names = {"two-sample", "anomaly"};
            std::fprintf(stderr,
                         "warning: no --label column; running the two label-free notions only\n");
        }
    }
    std::vector<Notion> notions;
    for (const auto& name : notion_names) notions.push_back(notion_from_name(name));

    PanelPlan plan;
    plan.method = method_from_name(method_name_flag == "pt"   ? "PT"
                                   : method_name_flag == "ss" ? "SS"
                                                              : "AT");
    plan.forest = forest_flags.to_hyperparams();
    plan.pt.max_permutations = permutations;
    plan.ss.calibration_fraction = calibration_fraction;
    plan.seed = seed;

    const auto panel = run_notion_panel(data, notions, plan);

    TestReport report;
    report.command = "panel";
    report.data = fingerprint(data);
    report.alpha = alpha;
    report.params = {{"method", method_name_flag},
                     {"seed", std::to_string(seed)},
                     {"alpha", format_double(alpha)},
                     {"trees", std::to_string(forest_flags.trees)}};
    if (!data_flags.preset.empty()) report.params["preset"] = data_flags.preset;
    for (const auto& entry : panel) {
        ReportEntry re;
        if (entry.result) {
            re = entry_from_result(*entry.result);
        } else {
            re.method = method_name_flag == "pt" ? "PT" : method_name_flag == "ss" ? "SS" : "AT";
            re.error = entry.error;
        }
        re.notion = notion_name(entry.notion);
        report.results.push_back(std::move(re));
    }
    emit_report(report, out_path);

    if (!plot_path.empty()) {
        // s-values are winsorized to [1, 10] in the plot data only.
        CsvTable plot;
        plot.header = {"notion", "method", "p_value", "s_value_winsorized", "reference_bits"};
        const double reference = -std::log2(0.05);
        for (const auto& entry : panel) {
            if (!entry.result) continue;
            const double sw = std::clamp(entry.result->s_value, 1.0, 10.0);
            plot.rows.push_back({notion_name(entry.notion), method_name(entry.result->method),
                                 format_double(entry.result->p_value), format_double(sw),
                                 format_double(reference)});
        }
        write_csv(plot_path, plot);
    }
    return kExitOk;
}

int run_simulate_command(const std::string& shift, int intensity, std::size_t n, std::size_t d,
                         std::uint64_t seed, const std::string& mean_shift_sign, bool unsafe_grid,
                         const std::string& out_path) {
    GmmShiftSpec spec;
    spec.shift = shift_from_name(shift);
    spec.intensity_index = intensity;
    spec.n_per_side = n;
    spec.d = d;
    spec.seed = seed;
    spec.mean_shift_negative_rest = mean_shift_sign == "negative";
    spec.unsafe_grid = unsafe_grid;

    const auto [train, test] = generate(spec);
    CsvTable table;
    for (std::size_t c = 0; c < d; ++c) table.header.push_back("x" + std::to_string(c + 1));
    table.header.push_back("origin");
    auto add_rows = [&](const Matrix& m, const char* origin) {
        for (std::size_t r = 0; r < m.rows(); ++r) {
            std::vector<std::string> row;
            for (std::size_t c = 0; c < d; ++c) row.push_back(format_double(m(r, c)));
            row.push_back(origin);
            table.rows.push_back(std::move(row));
        }
    };
    add_rows(train, "train");
    add_rows(test, "test");

    if (out_path.empty())
        std::fputs(csv_to_string(table).c_str(), stdout);
    else
        write_csv(out_path, table);
    return kExitOk;
}

int run_bench_command(const std::vector<std::string>& shifts,
                      const std::vector<int>& intensities, std::size_t n, std::size_t d,
                      const std::vector<std::string>& methods, std::size_t replicates,
                      std::uint64_t seed, const std::string& notion, std::size_t pt_perms,
                      std::size_t energy_perms, double rope, std::size_t mc_draws,
                      bool no_winsorize, bool unsafe_grid, const ForestFlags& forest_flags,
                      const std::string& out_dir) {
    BenchGrid grid;
    for (const auto& shift : shifts) {
        const ShiftKind kind = shift_from_name(shift);
        if (kind == ShiftKind::none) {
            GmmShiftSpec spec;
            spec.shift = kind;
            spec.n_per_side = n;
            spec.d = d;
            spec.unsafe_grid = unsafe_grid;
            grid.specs.push_back(spec);
            continue;
        }
        for (int intensity : intensities) {
            GmmShiftSpec spec;
            spec.shift = kind;
            spec.intensity_index = intensity;
            spec.n_per_side = n;
            spec.d = d;
            spec.unsafe_grid = unsafe_grid;
            grid.specs.push_back(spec);
        }
    }
    for (const auto& m : methods) grid.methods.push_back(method_from_name(m));
    grid.replicates = replicates;
    grid.seed = seed;
    grid.forest = forest_flags.to_hyperparams();
    grid.dsos_notion = notion_from_name(notion);
    grid.pt_permutations = pt_perms;
    grid.energy_permutations = energy_perms;

    const auto records = run_grid(grid);

    SummaryOptions options;
    options.rope_halfwidth = rope;
    options.mc_draws = mc_draws;
    options.seed = derive_seed(seed, 0xc0);
    options.winsorize = !no_winsorize;
    const auto table = summarize_table(records, grid.methods, options);

    const std::string records_path = out_dir + "/records.csv";
    const std::string summary_path = out_dir + "/summary.json";
    write_csv(records_path, records_to_csv(records, grid.specs));
    write_text_atomic(summary_path, summary_to_json(table, options));
    std::fprintf(stdout, "wrote %s and %s\n", records_path.c_str(), summary_path.c_str());
    return kExitOk;
}

int run_report_command(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const TestReport report = report_from_json(buffer.str());
    std::fputs(format_report(report).c_str(), stdout);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dsos: two-sample tests for no adverse shift via outlier scores"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file (keys mirror flag names)");

    // ---- test
    DataFlags test_data;
    ForestFlags test_forest;
    std::string test_method = "at", test_scorer = "anomaly", test_out;
    std::size_t test_perms = 1000;
    bool test_sequential = false, test_paper_exact = false, test_scores_only = false;
    double test_frac = 0.5, test_alpha = 0.05;
    std::uint64_t test_seed = 0;
    auto* cmd_test = app.add_subcommand("test", "run one test for no adverse shift");
    add_data_flags(cmd_test, test_data, true);
    add_forest_flags(cmd_test, test_forest);
    cmd_test->add_option("--method", test_method, "inference variant")
        ->check(CLI::IsMember({"pt", "ss", "at"}))
        ->capture_default_str();
    cmd_test->add_option("--scorer", test_scorer, "notion of outlyingness")
        ->check(CLI::IsMember({"two-sample", "anomaly", "residual", "uncertainty"}))
        ->capture_default_str();
    cmd_test->add_option("--permutations", test_perms, "max permutations (pt)")
        ->capture_default_str();
    cmd_test->add_flag("--sequential", test_sequential, "early-stop permutations (pt)");
    cmd_test->add_flag("--paper-exact-pvalue", test_paper_exact,
                       "use 1 - (1/R) sum I(T_r <= T0) instead of the add-one estimator");
    cmd_test->add_flag("--permute-scores-only", test_scores_only,
                       "approximate pt: skip recalibration under permutations");
    cmd_test->add_option("--calibration-fraction", test_frac, "calibration share (ss)")
        ->capture_default_str();
    cmd_test->add_option("--seed", test_seed, "RNG seed")->capture_default_str();
    cmd_test->add_option("--alpha", test_alpha, "rejection threshold for the verdict text")
        ->capture_default_str();
    cmd_test->add_option("--out", test_out, "write the JSON report here as well");

    // ---- panel
    DataFlags panel_data;
    ForestFlags panel_forest;
    std::string panel_method = "at", panel_out, panel_plot;
    std::vector<std::string> panel_notions;
    std::size_t panel_perms = 1000;
    double panel_frac = 0.5, panel_alpha = 0.05;
    std::uint64_t panel_seed = 0;
    auto* cmd_panel = app.add_subcommand("panel", "run every notion of outlyingness at once");
    add_data_flags(cmd_panel, panel_data, true);
    add_forest_flags(cmd_panel, panel_forest);
    cmd_panel->add_option("--method", panel_method, "inference variant")
        ->check(CLI::IsMember({"pt", "ss", "at"}))
        ->capture_default_str();
    cmd_panel->add_option("--notions", panel_notions, "notions to run (default: all feasible)")
        ->delimiter(',');
    cmd_panel->add_option("--permutations", panel_perms, "max permutations (pt)")
        ->capture_default_str();
    cmd_panel->add_option("--calibration-fraction", panel_frac, "calibration share (ss)")
        ->capture_default_str();
    cmd_panel->add_option("--seed", panel_seed, "RNG seed")->capture_default_str();
    cmd_panel->add_option("--alpha", panel_alpha, "reference threshold")->capture_default_str();
    cmd_panel->add_option("--out", panel_out, "write the JSON report here as well");
    cmd_panel->add_option("--plot-data", panel_plot,
                          "write plot CSV (s-values winsorized to [1,10])");

    // ---- simulate
    std::string sim_shift = "none", sim_sign = "positive", sim_out;
    int sim_intensity = 0;
    std::size_t sim_n = 400, sim_d = 4;
    std::uint64_t sim_seed = 0;
    bool sim_unsafe = false;
    auto* cmd_sim = app.add_subcommand("simulate", "draw one mixture-shift scenario as CSV");
    cmd_sim->add_option("--shift", sim_shift, "shift family")
        ->check(CLI::IsMember({"none", "label", "corrupted", "mean", "noise", "dependency"}))
        ->capture_default_str();
    cmd_sim->add_option("--intensity", sim_intensity, "intensity index 0..2")
        ->check(CLI::Range(0, 2))
        ->capture_default_str();
    cmd_sim->add_option("--n", sim_n, "rows per side")->capture_default_str();
    cmd_sim->add_option("--d", sim_d, "feature dimension")->capture_default_str();
    cmd_sim->add_option("--seed", sim_seed, "RNG seed")->capture_default_str();
    cmd_sim->add_option("--mean-shift-sign", sim_sign,
                        "unchanged coordinates of the shifted mean: positive (as printed) "
                        "or negative (baseline-matching)")
        ->check(CLI::IsMember({"positive", "negative"}))
        ->capture_default_str();
    cmd_sim->add_flag("--unsafe-grid", sim_unsafe, "allow n/d outside the published grid");
    cmd_sim->add_option("--out", sim_out, "output CSV (stdout when omitted)");

    // ---- bench
    std::vector<std::string> bench_shifts{"none", "label", "corrupted", "mean", "noise",
                                          "dependency"};
    std::vector<int> bench_intensities{2};
    std::vector<std::string> bench_methods{"SS", "AT", "CTST"};
    std::string bench_notion = "two-sample", bench_out_dir = ".";
    std::size_t bench_n = 400, bench_d = 4, bench_reps = 100, bench_pt = 199, bench_energy = 199,
                bench_draws = 10000;
    double bench_rope = 1.0;
    std::uint64_t bench_seed = 0;
    bool bench_no_winsor = false, bench_unsafe = false;
    ForestFlags bench_forest;
    bench_forest.trees = 128;
    auto* cmd_bench = app.add_subcommand("bench", "head-to-head comparison grid");
    cmd_bench->add_option("--shifts", bench_shifts, "shift families")->delimiter(',');
    cmd_bench->add_option("--intensities", bench_intensities, "intensity indices 0..2")
        ->delimiter(',');
    cmd_bench->add_option("--n", bench_n, "rows per side")->capture_default_str();
    cmd_bench->add_option("--d", bench_d, "feature dimension")->capture_default_str();
    cmd_bench->add_option("--methods", bench_methods, "methods: PT,SS,AT,CTST,ENERGY")
        ->delimiter(',');
    cmd_bench->add_option("--replicates", bench_reps, "replicates per cell")
        ->capture_default_str();
    cmd_bench->add_option("--seed", bench_seed, "RNG seed")->capture_default_str();
    cmd_bench->add_option("--notion", bench_notion, "scorer notion for the D-SOS methods")
        ->check(CLI::IsMember({"two-sample", "anomaly"}))
        ->capture_default_str();
    cmd_bench->add_option("--pt-permutations", bench_pt, "permutations for PT")
        ->capture_default_str();
    cmd_bench->add_option("--energy-permutations", bench_energy, "permutations for energy")
        ->capture_default_str();
    cmd_bench->add_option("--rope", bench_rope, "ROPE half-width in s-value bits")
        ->capture_default_str();
    cmd_bench->add_option("--mc-draws", bench_draws, "posterior Monte Carlo draws")
        ->capture_default_str();
    cmd_bench->add_flag("--no-winsorize", bench_no_winsor,
                        "compare raw s-values instead of the winsorized [1,10] scale");
    cmd_bench->add_flag("--unsafe-grid", bench_unsafe, "allow n/d outside the published grid");
    add_forest_flags(cmd_bench, bench_forest);
    cmd_bench->add_option("--out-dir", bench_out_dir, "directory for records.csv + summary.json")
        ->capture_default_str();

    // ---- report
    std::string report_path;
    auto* cmd_report = app.add_subcommand("report", "pretty-print a JSON report");
    cmd_report->add_option("file", report_path, "report file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (cmd_test->parsed())
            return run_test_command(test_data, test_forest, test_method, test_scorer, test_perms,
                                    test_sequential, test_paper_exact, test_scores_only, test_frac,
                                    test_seed, test_alpha, test_out);
        if (cmd_panel->parsed())
            return run_panel_command(panel_data, panel_forest, panel_method, panel_notions,
                                     panel_perms, panel_frac, panel_seed, panel_alpha, panel_out,
                                     panel_plot);
        if (cmd_sim->parsed())
            return run_simulate_command(sim_shift, sim_intensity, sim_n, sim_d, sim_seed, sim_sign,
                                        sim_unsafe, sim_out);
        if (cmd_bench->parsed())
            return run_bench_command(bench_shifts, bench_intensities, bench_n, bench_d,
                                     bench_methods, bench_reps, bench_seed, bench_notion, bench_pt,
                                     bench_energy, bench_rope, bench_draws, bench_no_winsor,
                                     bench_unsafe, bench_forest, bench_out_dir);
        if (cmd_report->parsed()) return run_report_command(report_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitError;
}
