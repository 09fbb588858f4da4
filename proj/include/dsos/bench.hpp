#pragma once

#include "dsos/csv.hpp"
#include "dsos/scorer.hpp"
#include "dsos/simgen.hpp"
#include "dsos/wauc.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dsos {

struct BenchGrid {
    std::vector<GmmShiftSpec> specs;
    std::vector<Method> methods; // PT, SS, AT, CTST, ENERGY
    std::size_t replicates = 100;
    std::uint64_t seed = 0;
    ForestHyperparams forest{};
    Notion dsos_notion = Notion::two_sample_classifier;
    std::size_t pt_permutations = 199;
    std::size_t energy_permutations = 199;

    void validate() const;
};

struct BenchRecord {
    std::size_t spec_index = 0;
    std::size_t replicate = 0;
    Method method = Method::AT;
    double statistic = 0.0;
    double p_value = 1.0;
    double s_value = 0.0;
    std::string error; // nonempty marks a failed cell entry; grid continues
};

// Every method in a (spec, replicate) cell consumes the identical generated
// dataset (common random numbers).
std::vector<BenchRecord> run_grid(const BenchGrid& grid);

struct ComparisonResult {
    Method method_a = Method::AT;
    Method method_b = Method::AT;
    double p_win_a = 0.0;
    double p_tie = 1.0;
    double p_win_b = 0.0;
    double rope_halfwidth = 1.0;
};

// Bayesian signed-rank comparison of paired s-values (Dirichlet-process
// construction): weights ~ Dirichlet(1,...,1) over the paired differences
// plus pseudo-observations at zero; each Monte Carlo draw votes by where its
// weighted pseudo-median (weighted median of Walsh averages) falls relative
// to [-rope, +rope].
ComparisonResult signed_rank_compare(std::span<const double> s_a, std::span<const double> s_b,
                                     double rope = 1.0, std::size_t prior_pseudo_at_zero = 1,
                                     std::size_t mc_draws = 10000, std::uint64_t seed = 0);

enum class Verdict { win_a, tie, win_b, inconclusive };

std::string verdict_name(Verdict v);

// Dominance rule: tie if p_tie >= 1/2, else a win for whichever side reaches
// 1/2; posteriors where no category reaches 1/2 are inconclusive.
Verdict verdict_from_posterior(const ComparisonResult& posterior);

struct SummaryOptions {
    double rope_halfwidth = 1.0;
    std::size_t prior_pseudo_at_zero = 1;
    std::size_t mc_draws = 10000;
    std::uint64_t seed = 0;
    // Compare on the winsorized [1,10] s-value reporting scale.
    bool winsorize = true;
    double winsor_lo = 1.0;
    double winsor_hi = 10.0;
};

struct CellVerdict {
    std::size_t spec_index = 0;
    Verdict verdict = Verdict::tie;
    ComparisonResult posterior;
};

struct PairSummary {
    Method a = Method::AT;
    Method b = Method::AT;
    std::size_t ties = 0;
    std::size_t wins_a = 0;
    std::size_t wins_b = 0;
    std::size_t inconclusive = 0;
    std::vector<CellVerdict> cells;
};

// One verdict per (method pair, grid cell); counts aggregate over cells.
std::vector<PairSummary> summarize_table(const std::vector<BenchRecord>& records,
                                         const std::vector<Method>& methods,
                                         const SummaryOptions& options);

CsvTable records_to_csv(const std::vector<BenchRecord>& records,
                        const std::vector<GmmShiftSpec>& specs);
std::string summary_to_json(const std::vector<PairSummary>& pairs, const SummaryOptions& options);

} // namespace dsos
