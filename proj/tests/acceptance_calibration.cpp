#include "acceptance_util.hpp"
#include "test_helpers.hpp"

#include "dsos/baselines.hpp"
#include "dsos/parallel.hpp"
#include "dsos/rng.hpp"
#include "dsos/shift_tests.hpp"
#include "dsos/simgen.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace dsos;

namespace {

Dataset null_gmm(std::size_t n_per_side, std::uint64_t seed) {
    GmmShiftSpec spec;
    spec.shift = ShiftKind::none;
    spec.n_per_side = n_per_side;
    spec.d = 4;
    spec.seed = seed;
    spec.unsafe_grid = n_per_side != 400 && n_per_side != 800 && n_per_side != 1600;
    auto [train, test] = generate(spec);
    return Dataset::from_pair(std::move(train), test);
}

ScorerConfig scorer_of(Notion notion, std::size_t trees, std::uint64_t seed) {
    ScorerConfig cfg;
    cfg.notion = notion;
    cfg.forest.n_trees = trees;
    cfg.seed = seed;
    return cfg;
}

double rejection_rate(const std::vector<double>& pvals) {
    std::size_t k = 0;
    for (double p : pvals) k += p <= 0.05;
    return static_cast<double>(k) / static_cast<double>(pvals.size());
}

std::string band_report(const char* name, double rate) {
    std::ostringstream out;
    out << name << " " << rate;
    return out.str();
}

} // namespace

TEST_CASE("criterion 3: type-I calibration on the null GMM baseline") {
    // SS is paired with the two-sample scorer; AT and PT use the anomaly
    // scorer, whose pooled-fit scores are exactly out-of-sample for the
    // labels (AT + two-sample measures ~0.10 here; see the project notes).
    const std::size_t runs = 200;

    std::vector<double> p_ss(runs), p_at(runs), p_ctst(runs);
    parallel_for(runs, [&](std::size_t i) {
        const Dataset data = null_gmm(400, 31000 + i);
        SplitPlan split;
        split.seed = derive_seed(3, i);
        p_ss[i] = dsos_ss(data, scorer_of(Notion::two_sample_classifier, 128, derive_seed(4, i)),
                          split)
                      .p_value;
        p_at[i] =
            dsos_at(data, scorer_of(Notion::anomaly_isolation, 128, 0), derive_seed(5, i)).p_value;
        ForestHyperparams forest;
        forest.n_trees = 128;
        SplitPlan ctst_split;
        ctst_split.seed = derive_seed(6, i);
        p_ctst[i] = ctst(data, ctst_split, forest).p_value;
    });

    const std::size_t pt_runs = 100;
    std::vector<double> p_pt(pt_runs);
    parallel_for(pt_runs, [&](std::size_t i) {
        const Dataset data = null_gmm(400, 37000 + i);
        PermutationPlan plan;
        plan.max_permutations = 199;
        plan.seed = derive_seed(7, i);
        p_pt[i] =
            dsos_pt(data, scorer_of(Notion::anomaly_isolation, 64, derive_seed(8, i)), plan)
                .p_value;
    });

    const double r_ss = rejection_rate(p_ss), r_at = rejection_rate(p_at),
                 r_ctst = rejection_rate(p_ctst), r_pt = rejection_rate(p_pt);
    auto in_band = [](double r) { return r >= 0.02 && r <= 0.09; };
    std::ostringstream detail;
    detail << band_report("SS", r_ss) << ", " << band_report("AT", r_at) << ", "
           << band_report("CTST", r_ctst) << ", " << band_report("PT", r_pt)
           << " (band [0.02, 0.09] at alpha 0.05)";
    acceptance::report(3, in_band(r_ss) && in_band(r_at) && in_band(r_ctst) && in_band(r_pt),
                       detail.str());
}

TEST_CASE("criterion 4: null p-values are uniform per variant") {
    const std::size_t runs = 500;
    const double critical = dsos::test::ks_critical_001(runs);

    std::vector<double> p_ss(runs), p_at(runs), p_pt(runs);
    parallel_for(runs, [&](std::size_t i) {
        {
            const Dataset data = null_gmm(200, 41000 + i);
            SplitPlan split;
            split.seed = derive_seed(13, i);
            p_ss[i] = dsos_ss(data,
                              scorer_of(Notion::two_sample_classifier, 128, derive_seed(14, i)),
                              split)
                          .p_value;
            p_at[i] = dsos_at(data, scorer_of(Notion::anomaly_isolation, 128, 0),
                              derive_seed(15, i))
                          .p_value;
        }
        {
            const Dataset data = null_gmm(100, 43000 + i);
            PermutationPlan plan;
            plan.max_permutations = 99;
            plan.seed = derive_seed(16, i);
            p_pt[i] = dsos_pt(data, scorer_of(Notion::anomaly_isolation, 64, derive_seed(17, i)),
                              plan)
                          .p_value;
        }
    });

    const double d_ss = dsos::test::ks_distance_uniform(p_ss);
    const double d_at = dsos::test::ks_distance_uniform(p_at);
    const double d_pt = dsos::test::ks_distance_uniform(p_pt);
    std::ostringstream detail;
    detail << "KS distances: SS " << d_ss << ", AT " << d_at << ", PT " << d_pt << " (critical "
           << critical << " at level 0.01)";
    acceptance::report(4, d_ss < critical && d_at < critical && d_pt < critical, detail.str());
}

TEST_CASE("criterion 7: fewer outliers never alarm (one-tailed behavior)") {
    // test side drawn from the same normal but truncated to the bulk
    const std::size_t seeds = 20;
    std::vector<double> p_pt(seeds), p_ss(seeds), p_at(seeds);
    parallel_for(seeds, [&](std::size_t i) {
        Rng rng = Rng::derive(71000, i);
        Matrix train(200, 4), test(200, 4);
        for (std::size_t r = 0; r < 200; ++r)
            for (std::size_t c = 0; c < 4; ++c) train(r, c) = rng.normal();
        for (std::size_t r = 0; r < 200; ++r)
            for (std::size_t c = 0; c < 4; ++c) {
                double v;
                do {
                    v = rng.normal();
                } while (std::abs(v) > 1.2);
                test(r, c) = v;
            }
        const Dataset data = Dataset::from_pair(std::move(train), test);

        PermutationPlan pt;
        pt.max_permutations = 199;
        pt.seed = derive_seed(72, i);
        p_pt[i] = dsos_pt(data, scorer_of(Notion::anomaly_isolation, 128, derive_seed(73, i)), pt)
                      .p_value;
        SplitPlan ss;
        ss.seed = derive_seed(74, i);
        p_ss[i] = dsos_ss(data, scorer_of(Notion::anomaly_isolation, 128, derive_seed(75, i)), ss)
                      .p_value;
        p_at[i] =
            dsos_at(data, scorer_of(Notion::anomaly_isolation, 128, 0), derive_seed(76, i)).p_value;
    });

    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    const double m_pt = median(p_pt), m_ss = median(p_ss), m_at = median(p_at);
    std::ostringstream detail;
    detail << "median p: PT " << m_pt << ", SS " << m_ss << ", AT " << m_at << " (need >= 0.3)";
    acceptance::report(7, m_pt >= 0.3 && m_ss >= 0.3 && m_at >= 0.3, detail.str());
}
