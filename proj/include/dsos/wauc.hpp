#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dsos {

enum class Method { PT, SS, AT, CTST, ENERGY };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

// Paired outlier scores for the two origins; the input to the test statistic.
struct ScoredSample {
    std::vector<double> train_scores;
    std::vector<double> test_scores;

    void validate() const; // throws std::invalid_argument

    std::size_t n_train() const noexcept { return train_scores.size(); }
    std::size_t n_test() const noexcept { return test_scores.size(); }
};

// Normal null of the weighted-AUC statistic under exchangeability.
struct AsymptoticNull {
    double mean;  // 1/12 exactly
    double sd;    // sqrt(a1 * (delta + 1) / n_test)
    double delta; // n_test / n_train
    double a1;    // 1/112
};

struct WaucResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double s_value = 0.0;
    Method method = Method::AT;
    double null_mean = 0.0;
    std::optional<double> null_sd;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> permutations_used;
};

inline constexpr double kSValueCapBits = 52.0;

// Midrank empirical CDF of the train scores at threshold s:
// (#{x < s} + 0.5 * #{x == s}) / n_train.
double empirical_cdf_train(const ScoredSample& sample, double s);

// Threshold weight: square of the train-score empirical CDF.
double weight_at(const ScoredSample& sample, double s);

// Weighted AUC with test as the positive class. Plug-in estimator with
// thresholds at the train scores and midrank tie handling on both sides:
//   T = (1/n) sum_i Cte(s_i) * Ftr(s_i)^2
// where Cte(s) = (#{test > s} + 0.5 * #{test == s}) / m. O((n+m) log(n+m)).
double wauc(const ScoredSample& sample);

AsymptoticNull asymptotic_null(std::size_t n_train, std::size_t n_test);

// One-sided upper-tail probability of t0 under the normal null.
double p_value_asymptotic(double t0, const AsymptoticNull& null);

// -log2(p); p == 0 maps to cap_bits.
double s_value(double p, double cap_bits = kSValueCapBits);

// Standard normal upper tail P(Z > z), evaluated via erfc.
double normal_upper_tail(double z);

} // namespace dsos
