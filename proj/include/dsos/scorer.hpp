#pragma once

#include "dsos/dataset.hpp"
#include "dsos/forest.hpp"
#include "dsos/wauc.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace dsos {

// The four notions of outlyingness. Higher scores always mean worse.
enum class Notion { two_sample_classifier, anomaly_isolation, residual, resampling_uncertainty };

std::string notion_name(Notion n);
Notion notion_from_name(const std::string& name);
bool notion_needs_label(Notion n);

struct ScorerConfig {
    Notion notion = Notion::two_sample_classifier;
    ForestHyperparams forest{};
    std::uint64_t seed = 0;
};

// True when out-of-bag scores exist for every calibration row (required by
// the out-of-bag asymptotic test). The isolation notion qualifies because its
// scores never consult labels, so in-sample scoring leaks nothing.
bool supports_out_of_bag(const ScorerConfig& config);

// A fitted score function. Calibration rows are scored out-of-sample:
//   two_sample   - origin classifier on pooled rows, per-row OOB vote share
//   anomaly      - isolation forest on pooled rows, plain scores
//   residual     - supervised forest on train rows; OOB for train, full model
//                  for test rows (which the model never saw)
//   uncertainty  - same model policy, per-tree spread instead of error
// Fresh rows are scored with the full fitted model.
class CalibratedScorer {
public:
    virtual ~CalibratedScorer() = default;

    // One score per calibration row, in calibration row order.
    virtual const std::vector<double>& calibration_scores() const = 0;

    // Scores for rows the model has never seen.
    virtual std::vector<double> score(const Dataset& fresh) const = 0;
};

class Scorer {
public:
    explicit Scorer(ScorerConfig config) : config_(std::move(config)) {}

    const ScorerConfig& config() const noexcept { return config_; }

    std::unique_ptr<CalibratedScorer> calibrate(const Dataset& data) const;

private:
    ScorerConfig config_;
};

Scorer make_scorer(const ScorerConfig& config);

// Partition per-row scores into a ScoredSample by origin.
ScoredSample split_by_origin(const std::vector<double>& scores,
                             const std::vector<Origin>& origin);

} // namespace dsos
