#include "dsos/bench.hpp"

#include "dsos/baselines.hpp"
#include "dsos/parallel.hpp"
#include "dsos/rng.hpp"
#include "dsos/shift_tests.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dsos {

void BenchGrid::validate() const {
    if (specs.empty()) throw std::invalid_argument("BenchGrid: no specs");
    if (methods.empty()) throw std::invalid_argument("BenchGrid: no methods");
    if (replicates < 20) throw std::invalid_argument("BenchGrid: replicates must be >= 20");
    if (notion_needs_label(dsos_notion))
        throw std::invalid_argument("BenchGrid: simulated data has no labels; use the "
                                    "two-sample or anomaly notion");
    for (const auto& spec : specs) spec.validate();
}

std::vector<BenchRecord> run_grid(const BenchGrid& grid) {
    grid.validate();

    const std::size_t n_cells = grid.specs.size() * grid.replicates;
    const std::size_t n_methods = grid.methods.size();
    std::vector<BenchRecord> records(n_cells * n_methods);

    parallel_for(n_cells, [&](std::size_t cell) {
        const std::size_t spec_index = cell / grid.replicates;
        const std::size_t replicate = cell % grid.replicates;

        GmmShiftSpec spec = grid.specs[spec_index];
        spec.seed = derive_seed(derive_seed(grid.seed, spec_index), replicate);
        auto [train, test] = generate(spec);
        const Dataset data = Dataset::from_pair(std::move(train), test);

        for (std::size_t mi = 0; mi < n_methods; ++mi) {
            const Method method = grid.methods[mi];
            BenchRecord& rec = records[cell * n_methods + mi];
            rec.spec_index = spec_index;
            rec.replicate = replicate;
            rec.method = method;
            const std::uint64_t seed = derive_seed(spec.seed, 1000 + mi);
            try {
                switch (method) {
                    case Method::PT: {
                        ScorerConfig cfg{grid.dsos_notion, grid.forest, seed};
                        PermutationPlan plan;
                        plan.max_permutations = grid.pt_permutations;
                        plan.seed = seed;
                        const auto r = dsos_pt(data, cfg, plan);
                        rec.statistic = r.statistic;
                        rec.p_value = r.p_value;
                        rec.s_value = r.s_value;
                        break;
                    }
                    case Method::SS: {
                        ScorerConfig cfg{grid.dsos_notion, grid.forest, seed};
                        SplitPlan plan;
                        plan.seed = seed;
                        const auto r = dsos_ss(data, cfg, plan);
                        rec.statistic = r.statistic;
                        rec.p_value = r.p_value;
                        rec.s_value = r.s_value;
                        break;
                    }
                    case Method::AT: {
                        ScorerConfig cfg{grid.dsos_notion, grid.forest, seed};
                        const auto r = dsos_at(data, cfg, seed);
                        rec.statistic = r.statistic;
                        rec.p_value = r.p_value;
                        rec.s_value = r.s_value;
                        break;
                    }
                    case Method::CTST: {
                        SplitPlan plan;
                        plan.seed = seed;
                        const auto r = ctst(data, plan, grid.forest);
                        rec.statistic = r.statistic;
                        rec.p_value = r.p_value;
                        rec.s_value = r.s_value;
                        break;
                    }
                    case Method::ENERGY: {
                        EnergyPlan plan{grid.energy_permutations, seed};
                        const auto r = energy_test(data, plan);
                        rec.statistic = r.statistic;
                        rec.p_value = r.p_value;
                        rec.s_value = r.s_value;
                        break;
                    }
                }
            } catch (const std::exception& e) {
                rec.error = e.what();
            }
        }
    });
    return records;
}

ComparisonResult signed_rank_compare(std::span<const double> s_a, std::span<const double> s_b,
                                     double rope, std::size_t prior_pseudo_at_zero,
                                     std::size_t mc_draws, std::uint64_t seed) {
    if (s_a.size() != s_b.size())
        throw std::invalid_argument("signed_rank_compare: length mismatch");
    if (s_a.size() < 20) throw std::invalid_argument("signed_rank_compare: need >= 20 pairs");
    if (rope < 0.0) throw std::invalid_argument("signed_rank_compare: rope must be >= 0");
    if (mc_draws == 0) throw std::invalid_argument("signed_rank_compare: mc_draws must be >= 1");

    std::vector<double> diffs(prior_pseudo_at_zero, 0.0);
    for (std::size_t i = 0; i < s_a.size(); ++i) diffs.push_back(s_a[i] - s_b[i]);
    const std::size_t n = diffs.size();

    // Walsh averages (d_i + d_j)/2 for i <= j, presorted once. Off-diagonal
    // pairs carry weight 2 w_i w_j, diagonal pairs w_i^2.
    struct Pair {
        double value;
        std::uint32_t i, j;
    };
    std::vector<Pair> walsh;
    walsh.reserve(n * (n + 1) / 2);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i; j < n; ++j)
            walsh.push_back({0.5 * (diffs[i] + diffs[j]), i, j});
    std::sort(walsh.begin(), walsh.end(),
              [](const Pair& a, const Pair& b) { return a.value < b.value; });

    std::vector<std::uint8_t> zone(mc_draws, 1); // 0: win_b, 1: tie, 2: win_a
    const Rng root(derive_seed(seed, 0xb5e5));
    parallel_for(mc_draws, [&](std::size_t draw) {
        Rng rng = root.fork(draw);
        std::vector<double> w(n);
        double total = 0.0;
        for (auto& v : w) {
            v = rng.exponential();
            total += v;
        }
        for (auto& v : w) v /= total;

        // lower and upper weighted medians over the sorted Walsh averages
        double low_median = walsh.back().value;
        double cum = 0.0;
        for (const auto& p : walsh) {
            cum += (p.i == p.j ? w[p.i] * w[p.i] : 2.0 * w[p.i] * w[p.j]);
            if (cum >= 0.5) {
                low_median = p.value;
                break;
            }
        }
        double high_median = walsh.front().value;
        cum = 0.0;
        for (auto it = walsh.rbegin(); it != walsh.rend(); ++it) {
            cum += (it->i == it->j ? w[it->i] * w[it->i] : 2.0 * w[it->i] * w[it->j]);
            if (cum >= 0.5) {
                high_median = it->value;
                break;
            }
        }
        const double median = 0.5 * (low_median + high_median);
        if (median > rope)
            zone[draw] = 2;
        else if (median < -rope)
            zone[draw] = 0;
    });

    ComparisonResult result;
    result.rope_halfwidth = rope;
    std::size_t wins_a = 0, ties = 0, wins_b = 0;
    for (auto z : zone) {
        if (z == 2) ++wins_a;
        else if (z == 1) ++ties;
        else ++wins_b;
    }
    const double total = static_cast<double>(mc_draws);
    result.p_win_a = static_cast<double>(wins_a) / total;
    result.p_tie = static_cast<double>(ties) / total;
    result.p_win_b = static_cast<double>(wins_b) / total;
    return result;
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::win_a: return "win-a";
        case Verdict::tie: return "tie";
        case Verdict::win_b: return "win-b";
        case Verdict::inconclusive: return "inconclusive";
    }
    throw std::logic_error("verdict_name: bad enum");
}

Verdict verdict_from_posterior(const ComparisonResult& posterior) {
    if (posterior.p_tie >= 0.5) return Verdict::tie;
    if (posterior.p_win_a >= 0.5) return Verdict::win_a;
    if (posterior.p_win_b >= 0.5) return Verdict::win_b;
    return Verdict::inconclusive;
}

std::vector<PairSummary> summarize_table(const std::vector<BenchRecord>& records,
                                         const std::vector<Method>& methods,
                                         const SummaryOptions& options) {
    std::size_t n_specs = 0;
    for (const auto& rec : records) n_specs = std::max(n_specs, rec.spec_index + 1);

    auto winsorize = [&](double s) {
        if (!options.winsorize) return s;
        return std::clamp(s, options.winsor_lo, options.winsor_hi);
    };

    // s-values keyed by (spec, method) in replicate order; failed entries
    // drop the replicate for every method in that cell.
    std::vector<PairSummary> table;
    for (std::size_t ai = 0; ai < methods.size(); ++ai) {
        for (std::size_t bi = ai + 1; bi < methods.size(); ++bi) {
            PairSummary pair;
            pair.a = methods[ai];
            pair.b = methods[bi];
            for (std::size_t spec = 0; spec < n_specs; ++spec) {
                std::vector<std::pair<std::size_t, double>> sa, sb;
                std::vector<std::size_t> failed;
                for (const auto& rec : records) {
                    if (rec.spec_index != spec) continue;
                    if (rec.method != pair.a && rec.method != pair.b) continue;
                    if (!rec.error.empty()) {
                        failed.push_back(rec.replicate);
                        continue;
                    }
                    (rec.method == pair.a ? sa : sb).push_back({rec.replicate, rec.s_value});
                }
                auto by_rep = [](const auto& x, const auto& y) { return x.first < y.first; };
                std::sort(sa.begin(), sa.end(), by_rep);
                std::sort(sb.begin(), sb.end(), by_rep);
                std::vector<double> va, vb;
                std::size_t ia = 0, ib = 0;
                while (ia < sa.size() && ib < sb.size()) {
                    if (sa[ia].first == sb[ib].first) {
                        const std::size_t rep = sa[ia].first;
                        if (std::find(failed.begin(), failed.end(), rep) == failed.end()) {
                            va.push_back(winsorize(sa[ia].second));
                            vb.push_back(winsorize(sb[ib].second));
                        }
                        ++ia;
                        ++ib;
                    } else if (sa[ia].first < sb[ib].first) {
                        ++ia;
                    } else {
                        ++ib;
                    }
                }
                if (va.empty()) continue;
                const std::uint64_t cell_seed =
                    derive_seed(derive_seed(options.seed, spec), ai * 64 + bi);
                const auto posterior =
                    signed_rank_compare(va, vb, options.rope_halfwidth,
                                        options.prior_pseudo_at_zero, options.mc_draws, cell_seed);
                CellVerdict cell;
                cell.spec_index = spec;
                cell.posterior = posterior;
                cell.posterior.method_a = pair.a;
                cell.posterior.method_b = pair.b;
                cell.verdict = verdict_from_posterior(posterior);
                switch (cell.verdict) {
                    case Verdict::win_a: ++pair.wins_a; break;
                    case Verdict::tie: ++pair.ties; break;
                    case Verdict::win_b: ++pair.wins_b; break;
                    case Verdict::inconclusive: ++pair.inconclusive; break;
                }
                pair.cells.push_back(std::move(cell));
            }
            table.push_back(std::move(pair));
        }
    }
    return table;
}

CsvTable records_to_csv(const std::vector<BenchRecord>& records,
                        const std::vector<GmmShiftSpec>& specs) {
    CsvTable table;
    table.header = {"spec_index", "shift",     "intensity", "n_per_side", "d",
                    "replicate",  "method",    "statistic", "p_value",    "s_value",
                    "error"};
    for (const auto& rec : records) {
        const auto& spec = specs.at(rec.spec_index);
        std::ostringstream stat, p, s;
        stat.precision(17);
        p.precision(17);
        s.precision(17);
        stat << rec.statistic;
        p << rec.p_value;
        s << rec.s_value;
        table.rows.push_back({std::to_string(rec.spec_index), shift_name(spec.shift),
                              std::to_string(spec.intensity_index),
                              std::to_string(spec.n_per_side), std::to_string(spec.d),
                              std::to_string(rec.replicate), method_name(rec.method),
                              rec.error.empty() ? stat.str() : "", rec.error.empty() ? p.str() : "",
                              rec.error.empty() ? s.str() : "", rec.error});
    }
    return table;
}

std::string summary_to_json(const std::vector<PairSummary>& pairs,
                            const SummaryOptions& options) {
    nlohmann::json j;
    j["rope_halfwidth"] = options.rope_halfwidth;
    j["mc_draws"] = options.mc_draws;
    j["winsorized"] = options.winsorize;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& pair : pairs) {
        nlohmann::json row;
        row["method_1"] = method_name(pair.a);
        row["method_2"] = method_name(pair.b);
        row["tie"] = pair.ties;
        row["win_1"] = pair.wins_a;
        row["win_2"] = pair.wins_b;
        row["inconclusive"] = pair.inconclusive;
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& cell : pair.cells) {
            cells.push_back({{"spec_index", cell.spec_index},
                             {"verdict", verdict_name(cell.verdict)},
                             {"p_win_1", cell.posterior.p_win_a},
                             {"p_tie", cell.posterior.p_tie},
                             {"p_win_2", cell.posterior.p_win_b}});
        }
        row["cells"] = std::move(cells);
        rows.push_back(std::move(row));
    }
    j["pairs"] = std::move(rows);
    return j.dump(2) + "\n";
}

} // namespace dsos
