#include "dsos/baselines.hpp"

#include "dsos/parallel.hpp"
#include "dsos/rng.hpp"
#include "dsos/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dsos {

void EnergyPlan::validate() const {
    if (permutations < 99) throw std::invalid_argument("EnergyPlan: permutations must be >= 99");
}

double mann_whitney_auc(const ScoredSample& sample) {
    sample.validate();
    std::vector<double> train = sample.train_scores;
    std::sort(train.begin(), train.end());
    double pairs = 0.0;
    for (double y : sample.test_scores) {
        const auto lo = std::lower_bound(train.begin(), train.end(), y);
        const auto hi = std::upper_bound(lo, train.end(), y);
        pairs += static_cast<double>(lo - train.begin()) + 0.5 * static_cast<double>(hi - lo);
    }
    return pairs / (static_cast<double>(train.size()) * static_cast<double>(sample.n_test()));
}

WaucResult ctst(const Dataset& data, const SplitPlan& plan, const ForestHyperparams& forest) {
    data.validate();
    const auto [cal_idx, inf_idx] = stratified_split(data, plan);
    const Dataset calibration = data.select(cal_idx);
    const Dataset inference = data.select(inf_idx);

    ScorerConfig cfg{Notion::two_sample_classifier, forest, derive_seed(plan.seed, 0x715)};
    const auto calibrated = make_scorer(cfg).calibrate(calibration);
    const auto scores = calibrated->score(inference);
    const auto sample = split_by_origin(scores, inference.origin);

    const double auc = mann_whitney_auc(sample);
    const double n1 = static_cast<double>(sample.n_train());
    const double n2 = static_cast<double>(sample.n_test());
    const double sd = std::sqrt((n1 + n2 + 1.0) / (12.0 * n1 * n2));
    const double p = normal_upper_tail((auc - 0.5) / sd);

    WaucResult result;
    result.statistic = auc;
    result.p_value = p;
    result.s_value = s_value(p);
    result.method = Method::CTST;
    result.null_mean = 0.5;
    result.null_sd = sd;
    result.n_train = sample.n_train();
    result.n_test = sample.n_test();
    result.seed = plan.seed;
    return result;
}

namespace {

double euclidean(std::span<const double> a, std::span<const double> b) {
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        ss += d * d;
    }
    return std::sqrt(ss);
}

// Energy distance from a pooled distance matrix and a side assignment.
double energy_from_distances(const std::vector<double>& dist, std::size_t n_pooled,
                             const std::vector<std::uint8_t>& is_test, std::size_t n,
                             std::size_t m) {
    double within_x = 0.0, within_y = 0.0, between = 0.0;
    for (std::size_t i = 0; i < n_pooled; ++i) {
        const double* row = dist.data() + i * n_pooled;
        for (std::size_t j = i + 1; j < n_pooled; ++j) {
            const double d = row[j];
            if (is_test[i] != is_test[j])
                between += d;
            else if (is_test[i])
                within_y += d;
            else
                within_x += d;
        }
    }
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    return 2.0 * between / (nn * mm) - 2.0 * within_x / (nn * nn) - 2.0 * within_y / (mm * mm);
}

} // namespace

double energy_statistic(const Matrix& train, const Matrix& test) {
    if (train.cols() != test.cols())
        throw std::invalid_argument("energy_statistic: feature width mismatch");
    if (train.rows() == 0 || test.rows() == 0)
        throw std::invalid_argument("energy_statistic: both sides must be nonempty");
    const double n = static_cast<double>(train.rows());
    const double m = static_cast<double>(test.rows());
    double between = 0.0, within_x = 0.0, within_y = 0.0;
    for (std::size_t i = 0; i < train.rows(); ++i)
        for (std::size_t j = 0; j < test.rows(); ++j) between += euclidean(train.row(i), test.row(j));
    for (std::size_t i = 0; i < train.rows(); ++i)
        for (std::size_t j = i + 1; j < train.rows(); ++j)
            within_x += euclidean(train.row(i), train.row(j));
    for (std::size_t i = 0; i < test.rows(); ++i)
        for (std::size_t j = i + 1; j < test.rows(); ++j)
            within_y += euclidean(test.row(i), test.row(j));
    return 2.0 * between / (n * m) - 2.0 * within_x / (n * n) - 2.0 * within_y / (m * m);
}

EnergyResult energy_test(const Dataset& data, const EnergyPlan& plan) {
    plan.validate();
    data.validate();

    const std::size_t n_pooled = data.n_rows();
    const std::size_t n = data.count(Origin::train);
    const std::size_t m = data.count(Origin::test);

    // Pooled pairwise distances are permutation-invariant; compute them once.
    std::vector<double> dist(n_pooled * n_pooled, 0.0);
    parallel_for(n_pooled, [&](std::size_t i) {
        for (std::size_t j = 0; j < n_pooled; ++j) {
            if (j <= i) continue;
            const double d = euclidean(data.features.row(i), data.features.row(j));
            dist[i * n_pooled + j] = d;
            dist[j * n_pooled + i] = d;
        }
    });

    std::vector<std::uint8_t> assignment(n_pooled);
    for (std::size_t i = 0; i < n_pooled; ++i)
        assignment[i] = data.origin[i] == Origin::test ? 1 : 0;
    const double e0 = energy_from_distances(dist, n_pooled, assignment, n, m);

    std::vector<std::uint8_t> exceed(plan.permutations, 0);
    parallel_for(plan.permutations, [&](std::size_t r) {
        Rng rng = Rng::derive(plan.seed, r + 1);
        std::vector<std::uint8_t> shuffled = assignment;
        rng.shuffle(shuffled);
        const double e = energy_from_distances(dist, n_pooled, shuffled, n, m);
        exceed[r] = e >= e0 ? 1 : 0;
    });

    std::size_t count = 0;
    for (auto e : exceed) count += e;
    const double p = static_cast<double>(1 + count) / (static_cast<double>(plan.permutations) + 1.0);

    EnergyResult result;
    result.statistic = e0;
    result.p_value = p;
    result.s_value = s_value(p, std::log2(static_cast<double>(plan.permutations) + 1.0));
    result.n_train = n;
    result.n_test = m;
    result.permutations = plan.permutations;
    result.seed = plan.seed;
    return result;
}

} // namespace dsos
