#include "dsos/scorer.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace dsos {

std::string notion_name(Notion n) {
    switch (n) {
        case Notion::two_sample_classifier: return "two-sample";
        case Notion::anomaly_isolation: return "anomaly";
        case Notion::residual: return "residual";
        case Notion::resampling_uncertainty: return "uncertainty";
    }
    throw std::logic_error("notion_name: bad enum");
}

Notion notion_from_name(const std::string& name) {
    if (name == "two-sample" || name == "two_sample") return Notion::two_sample_classifier;
    if (name == "anomaly") return Notion::anomaly_isolation;
    if (name == "residual") return Notion::residual;
    if (name == "uncertainty") return Notion::resampling_uncertainty;
    throw std::invalid_argument("unknown scorer notion: " + name);
}

bool notion_needs_label(Notion n) {
    return n == Notion::residual || n == Notion::resampling_uncertainty;
}

bool supports_out_of_bag(const ScorerConfig& config) {
    if (config.notion == Notion::anomaly_isolation) return true;
    return config.forest.bootstrap;
}

ScoredSample split_by_origin(const std::vector<double>& scores,
                             const std::vector<Origin>& origin) {
    if (scores.size() != origin.size())
        throw std::invalid_argument("split_by_origin: length mismatch");
    ScoredSample out;
    for (std::size_t i = 0; i < scores.size(); ++i)
        (origin[i] == Origin::train ? out.train_scores : out.test_scores).push_back(scores[i]);
    return out;
}

namespace {

class AnomalyCalibrated final : public CalibratedScorer {
public:
    AnomalyCalibrated(const Dataset& data, const ForestHyperparams& hp, std::uint64_t seed)
        : model_(fit_isolation_forest(data.features, hp, seed)) {
        scores_.reserve(data.n_rows());
        for (std::size_t r = 0; r < data.n_rows(); ++r)
            scores_.push_back(score_isolation(model_, data.features.row(r)));
    }

    const std::vector<double>& calibration_scores() const override { return scores_; }

    std::vector<double> score(const Dataset& fresh) const override {
        std::vector<double> out;
        out.reserve(fresh.n_rows());
        for (std::size_t r = 0; r < fresh.n_rows(); ++r)
            out.push_back(score_isolation(model_, fresh.features.row(r)));
        return out;
    }

private:
    ForestModel model_;
    std::vector<double> scores_;
};

class TwoSampleCalibrated final : public CalibratedScorer {
public:
    TwoSampleCalibrated(const Dataset& data, const ForestHyperparams& hp, std::uint64_t seed)
        : data_(data.features), model_(fit_random_forest(data, ForestTarget::origin_label, hp, seed)) {
        const ScoreMode mode = hp.bootstrap ? ScoreMode::oob : ScoreMode::full_model;
        scores_.reserve(data.n_rows());
        for (std::size_t r = 0; r < data.n_rows(); ++r)
            scores_.push_back(score_two_sample(model_, data_, r, mode));
    }

    const std::vector<double>& calibration_scores() const override { return scores_; }

    std::vector<double> score(const Dataset& fresh) const override {
        std::vector<double> out;
        out.reserve(fresh.n_rows());
        for (std::size_t r = 0; r < fresh.n_rows(); ++r)
            out.push_back(score_two_sample(model_, fresh.features, r, ScoreMode::full_model));
        return out;
    }

private:
    Matrix data_;
    ForestModel model_;
    std::vector<double> scores_;
};

// Shared machinery for the residual and uncertainty notions: a supervised
// forest fit on the train rows only.
class SupervisedCalibrated final : public CalibratedScorer {
public:
    SupervisedCalibrated(Notion notion, const Dataset& data, const ForestHyperparams& hp,
                         std::uint64_t seed)
        : notion_(notion) {
        if (!data.label)
            throw std::invalid_argument(notion_name(notion) +
                                        " scorer requires a label column");
        const auto train_rows = data.indices_of(Origin::train);
        if (train_rows.size() < 2)
            throw std::invalid_argument("supervised scorer: need at least 2 train rows");

        classification_ = data.label->kind == LabelKind::categorical;
        classes_ = data.label->classes;
        train_data_ = data.select(train_rows);
        model_ = fit_random_forest(train_data_,
                                   classification_ ? ForestTarget::supervised_label
                                                   : ForestTarget::supervised_response,
                                   hp, seed);

        // Train rows: out-of-bag. Test rows: the model never saw them.
        const ScoreMode train_mode = hp.bootstrap ? ScoreMode::oob : ScoreMode::full_model;
        scores_.assign(data.n_rows(), 0.0);
        for (std::size_t i = 0; i < train_rows.size(); ++i)
            scores_[train_rows[i]] = row_score(train_data_.features, i,
                                               train_data_.label->values[i], train_mode);
        for (std::size_t r = 0; r < data.n_rows(); ++r)
            if (data.origin[r] == Origin::test)
                scores_[r] = row_score(data.features, r, data.label->values[r],
                                       ScoreMode::full_model);
    }

    const std::vector<double>& calibration_scores() const override { return scores_; }

    std::vector<double> score(const Dataset& fresh) const override {
        const bool needs_truth = notion_ == Notion::residual;
        if (needs_truth && !fresh.label)
            throw std::invalid_argument("residual scorer: fresh rows need labels");
        std::vector<double> out;
        out.reserve(fresh.n_rows());
        for (std::size_t r = 0; r < fresh.n_rows(); ++r) {
            double truth = 0.0;
            if (needs_truth) truth = remap_label(*fresh.label, r);
            out.push_back(row_score(fresh.features, r, truth, ScoreMode::full_model));
        }
        return out;
    }

private:
    double row_score(const Matrix& rows, std::size_t row, double truth, ScoreMode mode) const {
        if (notion_ == Notion::residual) return score_residual(model_, rows, row, truth, mode);
        return score_uncertainty(model_, rows, row, mode);
    }

    // Class indices are only comparable through class names.
    double remap_label(const LabelColumn& label, std::size_t row) const {
        if (!classification_) return label.values[row];
        if (label.kind != LabelKind::categorical)
            throw std::invalid_argument("residual scorer: categorical label expected");
        const auto& name = label.classes[static_cast<std::size_t>(label.values[row])];
        const auto it = std::find(classes_.begin(), classes_.end(), name);
        if (it == classes_.end())
            throw std::invalid_argument("residual scorer: unknown class label '" + name + "'");
        return static_cast<double>(it - classes_.begin());
    }

    Notion notion_;
    bool classification_ = false;
    std::vector<std::string> classes_;
    Dataset train_data_;
    ForestModel model_;
    std::vector<double> scores_;
};

} // namespace

std::unique_ptr<CalibratedScorer> Scorer::calibrate(const Dataset& data) const {
    data.validate();
    if (notion_needs_label(config_.notion) && !data.label)
        throw std::invalid_argument(notion_name(config_.notion) +
                                    " scorer requires a label column");
    switch (config_.notion) {
        case Notion::anomaly_isolation:
            return std::make_unique<AnomalyCalibrated>(data, config_.forest, config_.seed);
        case Notion::two_sample_classifier:
            return std::make_unique<TwoSampleCalibrated>(data, config_.forest, config_.seed);
        case Notion::residual:
        case Notion::resampling_uncertainty:
            return std::make_unique<SupervisedCalibrated>(config_.notion, data, config_.forest,
                                                          config_.seed);
    }
    throw std::logic_error("Scorer::calibrate: bad notion");
}

Scorer make_scorer(const ScorerConfig& config) { return Scorer(config); }

} // namespace dsos
