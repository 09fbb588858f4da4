#include "dsos/forest.hpp"

#include "dsos/parallel.hpp"
#include "dsos/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dsos {

namespace {

constexpr double kMinGain = 1e-12;

std::size_t resolve_mtry(const ForestHyperparams& hp, ForestKind kind, std::size_t d) {
    if (hp.mtry > 0) return std::min(hp.mtry, d);
    if (kind == ForestKind::regression) return std::max<std::size_t>(1, d / 3);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));
}

std::size_t resolve_min_node(const ForestHyperparams& hp, ForestKind kind) {
    if (hp.min_node_size > 0) return hp.min_node_size;
    return kind == ForestKind::regression ? 5 : 10;
}

struct IsolationBuilder {
    const Matrix& data;
    std::size_t depth_cap;
    Rng& rng;
    Tree& tree;

    // rows is a scratch span the builder may reorder in place
    std::int32_t build(std::span<std::uint32_t> rows, std::size_t depth) {
        if (depth >= depth_cap || rows.size() <= 1) return make_leaf(rows, depth);

        // features with spread inside this node
        std::vector<std::uint32_t> candidates;
        candidates.reserve(data.cols());
        for (std::size_t f = 0; f < data.cols(); ++f) {
            double lo = data(rows[0], f), hi = lo;
            for (auto r : rows) {
                lo = std::min(lo, data(r, f));
                hi = std::max(hi, data(r, f));
            }
            if (hi > lo) candidates.push_back(static_cast<std::uint32_t>(f));
        }
        if (candidates.empty()) return make_leaf(rows, depth);

        const std::uint32_t f = candidates[rng.below(candidates.size())];
        double lo = data(rows[0], f), hi = lo;
        for (auto r : rows) {
            lo = std::min(lo, data(r, f));
            hi = std::max(hi, data(r, f));
        }
        const double split = rng.uniform(lo, hi);
        if (!(split > lo) || !(split < hi)) return make_leaf(rows, depth); // range too tight

        auto mid = std::partition(rows.begin(), rows.end(),
                                  [&](std::uint32_t r) { return data(r, f) < split; });
        const std::size_t n_left = static_cast<std::size_t>(mid - rows.begin());
        if (n_left == 0 || n_left == rows.size()) return make_leaf(rows, depth);

        const std::int32_t id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[id].feature = static_cast<std::int32_t>(f);
        tree.nodes[id].threshold = split;
        const std::int32_t left = build(rows.subspan(0, n_left), depth + 1);
        const std::int32_t right = build(rows.subspan(n_left), depth + 1);
        tree.nodes[id].left = left;
        tree.nodes[id].right = right;
        return id;
    }

    std::int32_t make_leaf(std::span<const std::uint32_t> rows, std::size_t depth) {
        const std::int32_t id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[id].payload = static_cast<std::int32_t>(tree.payload.size());
        tree.payload.push_back(static_cast<double>(depth));
        tree.payload.push_back(static_cast<double>(rows.size()));
        return id;
    }
};

struct CartBuilder {
    const Matrix& data;
    const std::vector<double>& target; // class index or response
    ForestKind kind;
    std::size_t n_classes;
    std::size_t mtry;
    std::size_t min_node;
    Rng& rng;
    Tree& tree;

    std::int32_t build(std::span<std::uint32_t> rows) {
        if (rows.size() <= min_node || is_pure(rows)) return make_leaf(rows);

        const auto split = best_split(rows);
        if (!split) return make_leaf(rows);

        auto mid = std::partition(rows.begin(), rows.end(), [&](std::uint32_t r) {
            return data(r, split->feature) < split->threshold;
        });
        const std::size_t n_left = static_cast<std::size_t>(mid - rows.begin());
        if (n_left == 0 || n_left == rows.size()) return make_leaf(rows);

        const std::int32_t id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[id].feature = static_cast<std::int32_t>(split->feature);
        tree.nodes[id].threshold = split->threshold;
        const std::int32_t left = build(rows.subspan(0, n_left));
        const std::int32_t right = build(rows.subspan(n_left));
        tree.nodes[id].left = left;
        tree.nodes[id].right = right;
        return id;
    }

    bool is_pure(std::span<const std::uint32_t> rows) const {
        const double first = target[rows[0]];
        for (auto r : rows)
            if (target[r] != first) return false;
        return true;
    }

    struct Split {
        std::size_t feature;
        double threshold;
    };

    std::optional<Split> best_split(std::span<const std::uint32_t> rows) {
        thread_local std::vector<std::pair<double, double>> sorted; // (x, y)
        thread_local std::vector<double> left_counts;

        std::vector<std::uint32_t> features(data.cols());
        std::iota(features.begin(), features.end(), 0u);
        for (std::size_t i = 0; i < mtry; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(features.size() - i));
            std::swap(features[i], features[j]);
        }

        double best_gain = kMinGain;
        std::optional<Split> best;
        const double n = static_cast<double>(rows.size());

        for (std::size_t fi = 0; fi < mtry; ++fi) {
            const std::size_t f = features[fi];
            sorted.clear();
            for (auto r : rows) sorted.emplace_back(data(r, f), target[r]);
            std::sort(sorted.begin(), sorted.end());
            if (sorted.front().first == sorted.back().first) continue;

            if (kind == ForestKind::classification) {
                left_counts.assign(n_classes, 0.0);
                std::vector<double> total_counts(n_classes, 0.0);
                for (const auto& [x, y] : sorted) total_counts[static_cast<std::size_t>(y)] += 1.0;
                double total_sq = 0.0;
                for (double c : total_counts) total_sq += c * c;
                const double parent_score = total_sq / n;

                double nl = 0.0;
                for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
                    left_counts[static_cast<std::size_t>(sorted[i].second)] += 1.0;
                    nl += 1.0;
                    if (sorted[i].first == sorted[i + 1].first) continue;
                    double left_sq = 0.0, right_sq = 0.0;
                    for (std::size_t c = 0; c < n_classes; ++c) {
                        left_sq += left_counts[c] * left_counts[c];
                        const double rc = total_counts[c] - left_counts[c];
                        right_sq += rc * rc;
                    }
                    // decrease in weighted Gini impurity, up to the factor 1/n
                    const double gain = left_sq / nl + right_sq / (n - nl) - parent_score;
                    if (gain > best_gain) {
                        best_gain = gain;
                        best = Split{f, midpoint(sorted[i].first, sorted[i + 1].first)};
                    }
                }
            } else {
                double total_sum = 0.0;
                for (const auto& [x, y] : sorted) total_sum += y;
                const double parent_score = total_sum * total_sum / n;
                double left_sum = 0.0, nl = 0.0;
                for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
                    left_sum += sorted[i].second;
                    nl += 1.0;
                    if (sorted[i].first == sorted[i + 1].first) continue;
                    const double right_sum = total_sum - left_sum;
                    // between-group sum of squares (variance reduction)
                    const double gain =
                        left_sum * left_sum / nl + right_sum * right_sum / (n - nl) - parent_score;
                    if (gain > best_gain) {
                        best_gain = gain;
                        best = Split{f, midpoint(sorted[i].first, sorted[i + 1].first)};
                    }
                }
            }
        }
        return best;
    }

    static double midpoint(double lo, double hi) {
        const double mid = lo + 0.5 * (hi - lo);
        return mid > lo ? mid : hi; // degenerate gap: split below hi
    }

    std::int32_t make_leaf(std::span<const std::uint32_t> rows) {
        const std::int32_t id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[id].payload = static_cast<std::int32_t>(tree.payload.size());
        if (kind == ForestKind::classification) {
            const std::size_t base = tree.payload.size();
            tree.payload.insert(tree.payload.end(), n_classes, 0.0);
            for (auto r : rows) tree.payload[base + static_cast<std::size_t>(target[r])] += 1.0;
        } else {
            double sum = 0.0;
            for (auto r : rows) sum += target[r];
            tree.payload.push_back(sum / static_cast<double>(rows.size()));
            tree.payload.push_back(static_cast<double>(rows.size()));
        }
        return id;
    }
};

void check_row(const ForestModel& model, const Matrix& rows, std::size_t row) {
    if (rows.cols() != model.n_features)
        throw std::invalid_argument("forest: feature dimension mismatch");
    if (row >= rows.rows()) throw std::out_of_range("forest: row index out of range");
}

// Trees used for a row under the given mode; oob mode requires fit data.
std::span<const std::uint32_t> oob_list(const ForestModel& model, const Matrix& rows,
                                        std::size_t row) {
    if (rows.rows() != model.n_rows_fit)
        throw std::invalid_argument("forest: oob scoring requires the fit-time data");
    const auto& list = model.oob_trees[row];
    if (list.empty()) throw std::invalid_argument("forest: row has no out-of-bag trees");
    return list;
}

template <typename PerTree>
double average_over_trees(const ForestModel& model, const Matrix& rows, std::size_t row,
                          ScoreMode mode, PerTree&& per_tree) {
    check_row(model, rows, row);
    double sum = 0.0;
    std::size_t used = 0;
    if (mode == ScoreMode::oob) {
        for (auto t : oob_list(model, rows, row)) {
            sum += per_tree(model.trees[t]);
            ++used;
        }
    } else {
        for (const auto& tree : model.trees) {
            sum += per_tree(tree);
            ++used;
        }
    }
    return sum / static_cast<double>(used);
}

// Soft vote: the tree's leaf class proportion (probability-forest semantics).
double class_vote(const Tree& tree, std::span<const double> x, std::size_t n_classes,
                  std::size_t class_index) {
    const std::size_t base = tree.leaf_payload(x);
    double total = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) total += tree.payload[base + c];
    return tree.payload[base + class_index] / total;
}

} // namespace

std::size_t Tree::leaf_payload(std::span<const double> x) const {
    std::int32_t id = 0;
    while (nodes[id].left >= 0) {
        id = x[nodes[id].feature] < nodes[id].threshold ? nodes[id].left : nodes[id].right;
    }
    return static_cast<std::size_t>(nodes[id].payload);
}

double average_path_length(std::size_t m) {
    if (m <= 1) return 0.0;
    double harmonic = 0.0;
    for (std::size_t i = 1; i + 1 <= m; ++i) harmonic += 1.0 / static_cast<double>(i);
    return 2.0 * harmonic - 2.0 * static_cast<double>(m - 1) / static_cast<double>(m);
}

ForestModel fit_isolation_forest(const Matrix& data, const ForestHyperparams& hp,
                                 std::uint64_t seed) {
    if (data.rows() < 2) throw std::invalid_argument("fit_isolation_forest: need at least 2 rows");
    if (hp.n_trees < 1) throw std::invalid_argument("fit_isolation_forest: n_trees must be >= 1");

    ForestModel model;
    model.kind = ForestKind::isolation;
    model.n_features = data.cols();
    model.n_rows_fit = data.rows();
    model.subsample_size =
        hp.subsample_size > 0 ? std::min(hp.subsample_size, data.rows())
                              : std::min<std::size_t>(256, data.rows());
    if (model.subsample_size < 2)
        throw std::invalid_argument("fit_isolation_forest: subsample_size must be >= 2");
    model.path_normalizer = average_path_length(model.subsample_size);

    const std::size_t depth_cap = hp.max_depth.value_or(static_cast<std::size_t>(
        std::ceil(std::log2(static_cast<double>(model.subsample_size)))));

    model.trees.resize(hp.n_trees);
    std::vector<std::vector<std::uint32_t>> in_sample(hp.n_trees);
    const Rng root(seed);
    parallel_for(hp.n_trees, [&](std::size_t t) {
        Rng rng = root.fork(t);
        auto rows = rng.sample_without_replacement(data.rows(), model.subsample_size);
        in_sample[t] = rows;
        IsolationBuilder builder{data, depth_cap, rng, model.trees[t]};
        builder.build(std::span<std::uint32_t>(rows), 0);
    });

    model.oob_trees.assign(data.rows(), {});
    std::vector<char> in_bag(data.rows());
    for (std::size_t t = 0; t < hp.n_trees; ++t) {
        std::fill(in_bag.begin(), in_bag.end(), 0);
        for (auto r : in_sample[t]) in_bag[r] = 1;
        for (std::size_t r = 0; r < data.rows(); ++r)
            if (!in_bag[r]) model.oob_trees[r].push_back(static_cast<std::uint32_t>(t));
    }
    return model;
}

double score_isolation(const ForestModel& model, std::span<const double> x) {
    if (model.kind != ForestKind::isolation)
        throw std::invalid_argument("score_isolation: model is not an isolation forest");
    if (x.size() != model.n_features)
        throw std::invalid_argument("score_isolation: feature dimension mismatch");
    double total = 0.0;
    for (const auto& tree : model.trees) {
        const std::size_t base = tree.leaf_payload(x);
        const double depth = tree.payload[base];
        const double leaf_n = tree.payload[base + 1];
        total += depth + average_path_length(static_cast<std::size_t>(leaf_n));
    }
    const double mean_path = total / static_cast<double>(model.trees.size());
    return std::exp2(-mean_path / model.path_normalizer);
}

ForestModel fit_random_forest(const Dataset& data, ForestTarget target,
                              const ForestHyperparams& hp, std::uint64_t seed) {
    if (hp.n_trees < 1) throw std::invalid_argument("fit_random_forest: n_trees must be >= 1");
    const std::size_t n = data.n_rows();
    if (n < 2) throw std::invalid_argument("fit_random_forest: need at least 2 rows");

    ForestModel model;
    model.n_features = data.n_features();
    model.n_rows_fit = n;

    std::vector<double> y(n);
    switch (target) {
        case ForestTarget::origin_label:
            model.kind = ForestKind::classification;
            model.n_classes = 2;
            for (std::size_t i = 0; i < n; ++i)
                y[i] = data.origin[i] == Origin::test ? 1.0 : 0.0;
            break;
        case ForestTarget::supervised_label: {
            if (!data.label || data.label->kind != LabelKind::categorical)
                throw std::invalid_argument("fit_random_forest: categorical label required");
            model.kind = ForestKind::classification;
            model.n_classes = data.label->n_classes();
            y = data.label->values;
            break;
        }
        case ForestTarget::supervised_response:
            if (!data.label) throw std::invalid_argument("fit_random_forest: label required");
            model.kind = ForestKind::regression;
            y = data.label->values;
            break;
    }

    if (model.kind == ForestKind::classification) {
        std::vector<char> seen(model.n_classes, 0);
        for (double v : y) seen[static_cast<std::size_t>(v)] = 1;
        std::size_t present = 0;
        for (char s : seen) present += s;
        if (present < 2)
            throw std::invalid_argument("fit_random_forest: classification needs >= 2 classes");
    } else {
        model.response_min = *std::min_element(y.begin(), y.end());
        model.response_max = *std::max_element(y.begin(), y.end());
    }

    const std::size_t mtry = resolve_mtry(hp, model.kind, data.n_features());
    const std::size_t min_node = resolve_min_node(hp, model.kind);

    model.trees.resize(hp.n_trees);
    std::vector<std::vector<char>> in_bag(hp.n_trees);
    const Rng root(seed);
    parallel_for(hp.n_trees, [&](std::size_t t) {
        Rng rng = root.fork(t);
        std::vector<std::uint32_t> rows;
        rows.reserve(n);
        in_bag[t].assign(n, 0);
        if (hp.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto r = static_cast<std::uint32_t>(rng.below(n));
                rows.push_back(r);
                in_bag[t][r] = 1;
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) rows.push_back(static_cast<std::uint32_t>(i));
            std::fill(in_bag[t].begin(), in_bag[t].end(), 1);
        }
        CartBuilder builder{data.features, y,       model.kind, model.n_classes,
                            mtry,          min_node, rng,        model.trees[t]};
        builder.build(std::span<std::uint32_t>(rows));
    });

    model.oob_trees.assign(n, {});
    for (std::size_t t = 0; t < hp.n_trees; ++t)
        for (std::size_t r = 0; r < n; ++r)
            if (!in_bag[t][r]) model.oob_trees[r].push_back(static_cast<std::uint32_t>(t));
    return model;
}

double vote_share(const ForestModel& model, const Matrix& rows, std::size_t row,
                  std::size_t class_index, ScoreMode mode) {
    if (model.kind != ForestKind::classification)
        throw std::invalid_argument("vote_share: classification model required");
    if (class_index >= model.n_classes) throw std::invalid_argument("vote_share: unknown class");
    const auto x = rows.row(row);
    return average_over_trees(model, rows, row, mode, [&](const Tree& tree) {
        return class_vote(tree, x, model.n_classes, class_index);
    });
}

double score_two_sample(const ForestModel& model, const Matrix& rows, std::size_t row,
                        ScoreMode mode) {
    if (model.n_classes != 2)
        throw std::invalid_argument("score_two_sample: origin classifier required");
    return vote_share(model, rows, row, 1, mode);
}

double predict_regression(const ForestModel& model, const Matrix& rows, std::size_t row,
                          ScoreMode mode) {
    if (model.kind != ForestKind::regression)
        throw std::invalid_argument("predict_regression: regression model required");
    const auto x = rows.row(row);
    return average_over_trees(model, rows, row, mode, [&](const Tree& tree) {
        return tree.payload[tree.leaf_payload(x)];
    });
}

double score_residual(const ForestModel& model, const Matrix& rows, std::size_t row, double truth,
                      ScoreMode mode) {
    if (model.kind == ForestKind::classification) {
        const double c = truth;
        if (c < 0 || c >= static_cast<double>(model.n_classes) || c != std::floor(c))
            throw std::invalid_argument("score_residual: unknown class label");
        return 1.0 - vote_share(model, rows, row, static_cast<std::size_t>(c), mode);
    }
    if (!std::isfinite(truth)) throw std::invalid_argument("score_residual: non-finite truth");
    return std::abs(predict_regression(model, rows, row, mode) - truth);
}

double score_uncertainty(const ForestModel& model, const Matrix& rows, std::size_t row,
                         ScoreMode mode) {
    if (model.kind == ForestKind::isolation)
        throw std::invalid_argument("score_uncertainty: supervised model required");
    check_row(model, rows, row);
    const auto x = rows.row(row);

    auto per_tree = [&](const Tree& tree) {
        const std::size_t base = tree.leaf_payload(x);
        if (model.kind == ForestKind::regression) return tree.payload[base];
        double total = 0.0;
        for (std::size_t c = 0; c < model.n_classes; ++c) total += tree.payload[base + c];
        return tree.payload[base + 1] / total; // leaf class-1 proportion
    };

    double sum = 0.0, sum_sq = 0.0;
    std::size_t used = 0;
    auto accumulate = [&](const Tree& tree) {
        const double v = per_tree(tree);
        sum += v;
        sum_sq += v * v;
        ++used;
    };
    if (mode == ScoreMode::oob)
        for (auto t : oob_list(model, rows, row)) accumulate(model.trees[t]);
    else
        for (const auto& tree : model.trees) accumulate(tree);

    if (used < 2) throw std::invalid_argument("score_uncertainty: fewer than 2 usable trees");
    const double k = static_cast<double>(used);
    const double var = std::max(0.0, (sum_sq - sum * sum / k) / (k - 1.0));
    return std::sqrt(var) / std::sqrt(k);
}

} // namespace dsos
