#include "dsos/forest.hpp"

#include "dsos/rng.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace dsos;

namespace {

Matrix gaussian_blob(std::size_t n, std::size_t d, Rng& rng, double center = 0.0,
                     double scale = 1.0) {
    Matrix m(n, d);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) m(r, c) = center + scale * rng.normal();
    return m;
}

Dataset two_blob_dataset(std::size_t n_per_side, std::size_t d, Rng& rng, double test_shift) {
    Matrix train = gaussian_blob(n_per_side, d, rng);
    Matrix test = gaussian_blob(n_per_side, d, rng, test_shift);
    return Dataset::from_pair(std::move(train), test);
}

ForestHyperparams with_trees(std::size_t n) {
    ForestHyperparams hp;
    hp.n_trees = n;
    return hp;
}

} // namespace

TEST_CASE("harmonic path normalizer") {
    CHECK(average_path_length(0) == 0.0);
    CHECK(average_path_length(1) == 0.0);
    // c(2) = 2*H(1) - 2*(1)/2 = 1
    CHECK(average_path_length(2) == doctest::Approx(1.0).epsilon(1e-15));
    // c(3) = 2*(1 + 1/2) - 2*2/3 = 3 - 4/3
    CHECK(average_path_length(3) == doctest::Approx(3.0 - 4.0 / 3.0).epsilon(1e-15));
    CHECK(average_path_length(256) > average_path_length(255));
}

TEST_CASE("isolation forest isolates a far point") {
    std::size_t hits = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        Matrix data = gaussian_blob(100, 2, rng);
        data(0, 0) = 25.0;
        data(0, 1) = -25.0;
        ForestHyperparams hp;
        hp.n_trees = 100;
        const auto model = fit_isolation_forest(data, hp, seed);
        const double outlier = score_isolation(model, data.row(0));
        double max_inlier = 0.0;
        for (std::size_t r = 1; r < data.rows(); ++r)
            max_inlier = std::max(max_inlier, score_isolation(model, data.row(r)));
        if (outlier > max_inlier) ++hits;
    }
    CHECK(hits >= 45);
}

TEST_CASE("isolation scores live strictly inside (0,1) and are deterministic") {
    Rng rng(3);
    Matrix data = gaussian_blob(200, 3, rng);
    ForestHyperparams hp;
    hp.n_trees = 150;
    const auto a = fit_isolation_forest(data, hp, 99);
    const auto b = fit_isolation_forest(data, hp, 99);
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const double s = score_isolation(a, data.row(r));
        CHECK(s > 0.0);
        CHECK(s < 1.0);
        CHECK(s == score_isolation(b, data.row(r))); // bit-identical across fits
    }
}

TEST_CASE("identical rows get identical isolation scores") {
    Rng rng(4);
    Matrix data = gaussian_blob(60, 2, rng);
    for (std::size_t c = 0; c < 2; ++c) data(1, c) = data(0, c);
    const auto model = fit_isolation_forest(data, with_trees(50), 5);
    CHECK(score_isolation(model, data.row(0)) == score_isolation(model, data.row(1)));
}

TEST_CASE("constant data yields depth-zero trees and constant scores") {
    Matrix data(40, 2, 1.5);
    const auto model = fit_isolation_forest(data, with_trees(20), 1);
    const double s0 = score_isolation(model, data.row(0));
    for (std::size_t r = 1; r < data.rows(); ++r) CHECK(score_isolation(model, data.row(r)) == s0);
    for (const auto& tree : model.trees) CHECK(tree.nodes.size() == 1);
}

TEST_CASE("isolation rejects degenerate input") {
    Matrix one(1, 2, 0.0);
    CHECK_THROWS_AS(fit_isolation_forest(one, {}, 1), std::invalid_argument);
    Rng rng(8);
    Matrix data = gaussian_blob(20, 2, rng);
    const auto model = fit_isolation_forest(data, with_trees(10), 1);
    std::vector<double> short_row{1.0};
    CHECK_THROWS_AS(score_isolation(model, short_row), std::invalid_argument);
}

TEST_CASE("origin forest separates disjoint supports") {
    std::size_t ok = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        Dataset data = two_blob_dataset(100, 2, rng, 8.0); // disjoint supports
        ForestHyperparams hp;
        hp.n_trees = 100;
        const auto model = fit_random_forest(data, ForestTarget::origin_label, hp, seed);
        // OOB AUC of probability-of-test
        std::vector<double> tr, te;
        for (std::size_t r = 0; r < data.n_rows(); ++r) {
            const double s = score_two_sample(model, data.features, r, ScoreMode::oob);
            (data.origin[r] == Origin::train ? tr : te).push_back(s);
        }
        double pairs = 0.0;
        for (double a : tr)
            for (double b : te) pairs += b > a ? 1.0 : (b == a ? 0.5 : 0.0);
        if (pairs / (static_cast<double>(tr.size()) * te.size()) >= 0.95) ++ok;
    }
    CHECK(ok == 20);
}

TEST_CASE("origin forest on pure noise has chance-level OOB AUC") {
    std::vector<double> aucs;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed + 100);
        Dataset data = two_blob_dataset(400, 2, rng, 0.0);
        const auto model =
            fit_random_forest(data, ForestTarget::origin_label, with_trees(100), seed);
        std::vector<double> tr, te;
        for (std::size_t r = 0; r < data.n_rows(); ++r) {
            const double s = score_two_sample(model, data.features, r, ScoreMode::oob);
            (data.origin[r] == Origin::train ? tr : te).push_back(s);
        }
        double pairs = 0.0;
        for (double a : tr)
            for (double b : te) pairs += b > a ? 1.0 : (b == a ? 0.5 : 0.0);
        aucs.push_back(pairs / (static_cast<double>(tr.size()) * te.size()));
    }
    for (double a : aucs) {
        CHECK(a > 0.4);
        CHECK(a < 0.6);
    }
}

TEST_CASE("oob bookkeeping is consistent and nearly complete") {
    Rng rng(17);
    Dataset data = two_blob_dataset(150, 3, rng, 0.5);
    ForestHyperparams hp;
    hp.n_trees = 100;
    const auto model = fit_random_forest(data, ForestTarget::origin_label, hp, 11);
    std::size_t with_oob = 0;
    for (const auto& list : model.oob_trees) {
        if (!list.empty()) ++with_oob;
        CHECK(std::is_sorted(list.begin(), list.end()));
        // expected OOB fraction ~ e^-1; allow a wide band
        CHECK(list.size() < 70);
    }
    CHECK(with_oob >= static_cast<std::size_t>(0.99 * static_cast<double>(data.n_rows())));
}

TEST_CASE("single-class classification target is rejected") {
    Rng rng(21);
    Dataset data = two_blob_dataset(20, 2, rng, 0.0);
    LabelColumn lc;
    lc.kind = LabelKind::categorical;
    lc.classes = {"only"};
    lc.values.assign(data.n_rows(), 0.0);
    data.label = lc;
    CHECK_THROWS_AS(fit_random_forest(data, ForestTarget::supervised_label, {}, 1),
                    std::invalid_argument);
}

TEST_CASE("regression on constant response predicts the constant") {
    Rng rng(22);
    Dataset data = two_blob_dataset(30, 2, rng, 0.0);
    LabelColumn lc;
    lc.kind = LabelKind::numeric;
    lc.values.assign(data.n_rows(), 4.25);
    data.label = lc;
    const auto model =
        fit_random_forest(data, ForestTarget::supervised_response, with_trees(30), 2);
    for (std::size_t r = 0; r < data.n_rows(); ++r)
        CHECK(predict_regression(model, data.features, r, ScoreMode::full_model) == 4.25);
    CHECK(model.response_min == 4.25);
    CHECK(model.response_max == 4.25);
}

TEST_CASE("regression predictions stay inside the training response range") {
    Rng rng(23);
    Dataset data = two_blob_dataset(100, 2, rng, 0.0);
    LabelColumn lc;
    lc.kind = LabelKind::numeric;
    for (std::size_t r = 0; r < data.n_rows(); ++r)
        lc.values.push_back(data.features(r, 0) * 2.0 + rng.normal());
    data.label = lc;
    const auto model =
        fit_random_forest(data, ForestTarget::supervised_response, with_trees(50), 3);
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
        const double p = predict_regression(model, data.features, r, ScoreMode::full_model);
        CHECK(p >= model.response_min);
        CHECK(p <= model.response_max);
    }
}

TEST_CASE("residual scores") {
    Rng rng(24);
    Dataset data = two_blob_dataset(60, 2, rng, 0.0);
    LabelColumn lc;
    lc.kind = LabelKind::numeric;
    lc.values.assign(data.n_rows(), 0.0);
    data.label = lc;
    const auto model =
        fit_random_forest(data, ForestTarget::supervised_response, with_trees(20), 4);
    // prediction is 0 everywhere; |0 - 5| = 5
    CHECK(score_residual(model, data.features, 0, 5.0, ScoreMode::full_model) == 5.0);
    CHECK(score_residual(model, data.features, 0, 0.0, ScoreMode::full_model) == 0.0);
}

TEST_CASE("residual rejects unknown class labels") {
    Rng rng(25);
    Dataset data = two_blob_dataset(40, 2, rng, 4.0);
    const auto model =
        fit_random_forest(data, ForestTarget::origin_label, with_trees(20), 5);
    CHECK_THROWS_AS(score_residual(model, data.features, 0, 7.0, ScoreMode::full_model),
                    std::invalid_argument);
    CHECK_THROWS_AS(score_residual(model, data.features, 0, 0.5, ScoreMode::full_model),
                    std::invalid_argument);
}

TEST_CASE("uncertainty is zero when all trees agree") {
    Rng rng(26);
    Dataset data = two_blob_dataset(30, 2, rng, 0.0);
    LabelColumn lc;
    lc.kind = LabelKind::numeric;
    lc.values.assign(data.n_rows(), 2.0);
    data.label = lc;
    const auto model =
        fit_random_forest(data, ForestTarget::supervised_response, with_trees(25), 6);
    CHECK(score_uncertainty(model, data.features, 0, ScoreMode::full_model) == 0.0);
}

TEST_CASE("uncertainty matches the two-point formula") {
    // Hand-built model: two regression stumps predicting 0 and 1 for every input.
    ForestModel model;
    model.kind = ForestKind::regression;
    model.n_features = 1;
    model.n_rows_fit = 1;
    for (double v : {0.0, 1.0}) {
        Tree tree;
        tree.nodes.emplace_back();
        tree.nodes[0].payload = 0;
        tree.payload = {v, 1.0};
        model.trees.push_back(tree);
    }
    model.oob_trees = {{0, 1}};
    Matrix rows(1, 1, 0.0);
    // sd of {0,1} = 0.7071..., SE = sd / sqrt(2) = 0.5
    CHECK(score_uncertainty(model, rows, 0, ScoreMode::full_model) ==
          doctest::Approx(0.5).epsilon(1e-12));

    ForestModel single = model;
    single.trees.resize(1);
    single.oob_trees = {{0}};
    CHECK_THROWS_AS(score_uncertainty(single, rows, 0, ScoreMode::full_model),
                    std::invalid_argument);
}

TEST_CASE("uncertainty shrinks as the forest grows") {
    Rng rng(27);
    Dataset data = two_blob_dataset(80, 2, rng, 0.0);
    LabelColumn lc;
    lc.kind = LabelKind::numeric;
    for (std::size_t r = 0; r < data.n_rows(); ++r) lc.values.push_back(rng.normal());
    data.label = lc;
    double mean_small = 0.0, mean_big = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto small = fit_random_forest(data, ForestTarget::supervised_response,
                                             with_trees(25), seed);
        const auto big = fit_random_forest(data, ForestTarget::supervised_response,
                                           with_trees(400), seed);
        for (std::size_t r = 0; r < data.n_rows(); ++r) {
            mean_small += score_uncertainty(small, data.features, r, ScoreMode::full_model);
            mean_big += score_uncertainty(big, data.features, r, ScoreMode::full_model);
        }
    }
    CHECK(mean_big < mean_small);
}

TEST_CASE("oob scoring demands fit data and nonempty oob lists") {
    Rng rng(28);
    Dataset data = two_blob_dataset(50, 2, rng, 1.0);
    ForestHyperparams hp;
    hp.n_trees = 40;
    const auto model = fit_random_forest(data, ForestTarget::origin_label, hp, 7);
    Matrix other(5, 2, 0.0);
    CHECK_THROWS_AS(score_two_sample(model, other, 0, ScoreMode::oob), std::invalid_argument);
    CHECK_NOTHROW(score_two_sample(model, other, 0, ScoreMode::full_model));

    ForestModel crippled = model;
    crippled.oob_trees[0].clear();
    CHECK_THROWS_AS(score_two_sample(crippled, data.features, 0, ScoreMode::oob),
                    std::invalid_argument);
}

TEST_CASE("forests are deterministic given (data, hyperparams, seed)") {
    Rng rng(29);
    Dataset data = two_blob_dataset(80, 3, rng, 0.7);
    ForestHyperparams hp;
    hp.n_trees = 60;
    const auto a = fit_random_forest(data, ForestTarget::origin_label, hp, 123);
    const auto b = fit_random_forest(data, ForestTarget::origin_label, hp, 123);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
        REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
        CHECK(a.trees[t].payload == b.trees[t].payload);
    }
    CHECK(a.oob_trees == b.oob_trees);
    for (std::size_t r = 0; r < data.n_rows(); ++r)
        CHECK(score_two_sample(a, data.features, r, ScoreMode::oob) ==
              score_two_sample(b, data.features, r, ScoreMode::oob));
}
