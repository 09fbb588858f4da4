#pragma once

#include "dsos/dataset.hpp"
#include "dsos/forest.hpp"
#include "dsos/shift_tests.hpp"
#include "dsos/wauc.hpp"

#include <cstdint>

namespace dsos {

struct EnergyPlan {
    std::size_t permutations = 199;
    std::uint64_t seed = 0;

    void validate() const;
};

struct EnergyResult {
    double statistic = 0.0; // energy distance, nonnegative
    double p_value = 1.0;
    double s_value = 0.0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::size_t permutations = 0;
    std::uint64_t seed = 0;
};

// Classifier two-sample test: origin forest fit on an origin-stratified half,
// plain (unweighted) AUC of its probability-of-test on the held-out half,
// one-sided upper-tail p from the Mann-Whitney normal approximation
// (mean 1/2, variance (n1+n2+1)/(12 n1 n2)).
WaucResult ctst(const Dataset& data, const SplitPlan& plan,
                const ForestHyperparams& forest = {});

// Midrank AUC of test scores against train scores: P(test > train) + 0.5 ties.
double mann_whitney_auc(const ScoredSample& sample);

// Energy distance between the two sides:
//   E = 2/(nm) sum ||x_i - y_j|| - 1/n^2 sum ||x_i - x_i'|| - 1/m^2 sum ||y_j - y_j'||
// with Euclidean norms; permutation p-value with the add-one estimator.
EnergyResult energy_test(const Dataset& data, const EnergyPlan& plan);

// The statistic alone, without inference.
double energy_statistic(const Matrix& train, const Matrix& test);

} // namespace dsos
