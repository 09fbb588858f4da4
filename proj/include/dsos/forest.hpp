#pragma once

#include "dsos/dataset.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dsos {

enum class ForestKind { isolation, classification, regression };

enum class ForestTarget { origin_label, supervised_label, supervised_response };

enum class ScoreMode { full_model, oob };

struct ForestHyperparams {
    std::size_t n_trees = 500;
    // 0 selects the rule: floor(sqrt(d)) for classification, max(1, floor(d/3)) for regression.
    std::size_t mtry = 0;
    // Nodes at or below this size become leaves. 0 selects the kind default:
    // 10 for classification (probability-forest convention), 5 for regression.
    std::size_t min_node_size = 0;
    // Isolation only; 0 selects min(256, n).
    std::size_t subsample_size = 0;
    // Isolation depth cap; defaults to ceil(log2(subsample_size)).
    std::optional<std::size_t> max_depth;
    bool bootstrap = true;
};

struct TreeNode {
    std::int32_t left = -1; // -1 marks a leaf
    std::int32_t right = -1;
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t payload = -1; // leaf payload offset
};

// Flat binary tree. Leaf payload layout depends on the forest kind:
//   isolation:      {depth, node_size}
//   classification: per-class bootstrap counts
//   regression:     {mean_response, node_size}
struct Tree {
    std::vector<TreeNode> nodes;
    std::vector<double> payload;

    // Index into payload for the leaf x falls into.
    std::size_t leaf_payload(std::span<const double> x) const;
};

struct ForestModel {
    ForestKind kind = ForestKind::isolation;
    std::size_t n_features = 0;
    std::size_t n_classes = 0;      // classification payload stride
    std::size_t n_rows_fit = 0;
    std::size_t subsample_size = 0; // isolation
    double path_normalizer = 0.0;   // c(subsample_size)
    double response_min = 0.0;      // regression training range
    double response_max = 0.0;
    std::vector<Tree> trees;
    // Per fit row: trees whose (sub)sample excluded that row, ascending.
    std::vector<std::vector<std::uint32_t>> oob_trees;
};

// Average path length of an unsuccessful binary search among m values:
// c(m) = 2 H(m-1) - 2 (m-1)/m with exact harmonic numbers; c(0) = c(1) = 0.
double average_path_length(std::size_t m);

ForestModel fit_isolation_forest(const Matrix& data, const ForestHyperparams& hp,
                                 std::uint64_t seed);

// s(x) = 2^(-mean_path_length(x) / c(subsample_size)); higher is more outlying.
double score_isolation(const ForestModel& model, std::span<const double> x);

// Bagged CART trees: Gini splits for classification targets, variance splits
// for a numeric response. Bootstrap is with replacement at full sample size;
// out-of-bag membership is recorded per row.
ForestModel fit_random_forest(const Dataset& data, ForestTarget target,
                              const ForestHyperparams& hp, std::uint64_t seed);

// Fraction of trees voting "test" (class 1); leaf-count ties split the vote.
// In oob mode `rows` must be the fit data and only that row's OOB trees count.
double score_two_sample(const ForestModel& model, const Matrix& rows, std::size_t row,
                        ScoreMode mode);

// Classification: 1 - vote share of the true class. Regression: |prediction - truth|.
double score_residual(const ForestModel& model, const Matrix& rows, std::size_t row,
                      double truth, ScoreMode mode);

// Standard error of the mean per-tree prediction; the per-tree prediction is
// the leaf class-1 proportion (classification) or the leaf mean (regression).
double score_uncertainty(const ForestModel& model, const Matrix& rows, std::size_t row,
                         ScoreMode mode);

// Mean of per-tree leaf means over the selected trees (regression).
double predict_regression(const ForestModel& model, const Matrix& rows, std::size_t row,
                          ScoreMode mode);

// Vote share of an arbitrary class over the selected trees (classification).
double vote_share(const ForestModel& model, const Matrix& rows, std::size_t row,
                  std::size_t class_index, ScoreMode mode);

} // namespace dsos
