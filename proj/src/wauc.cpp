#include "dsos/wauc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dsos {

std::string method_name(Method m) {
    switch (m) {
        case Method::PT: return "PT";
        case Method::SS: return "SS";
        case Method::AT: return "AT";
        case Method::CTST: return "CTST";
        case Method::ENERGY: return "ENERGY";
    }
    throw std::logic_error("method_name: bad enum");
}

Method method_from_name(const std::string& name) {
    if (name == "PT") return Method::PT;
    if (name == "SS") return Method::SS;
    if (name == "AT") return Method::AT;
    if (name == "CTST") return Method::CTST;
    if (name == "ENERGY") return Method::ENERGY;
    throw std::invalid_argument("unknown method name: " + name);
}

void ScoredSample::validate() const {
    if (train_scores.empty() || test_scores.empty())
        throw std::invalid_argument("ScoredSample: both sides must be nonempty");
    for (double v : train_scores)
        if (!std::isfinite(v)) throw std::invalid_argument("ScoredSample: non-finite train score");
    for (double v : test_scores)
        if (!std::isfinite(v)) throw std::invalid_argument("ScoredSample: non-finite test score");
}

double empirical_cdf_train(const ScoredSample& sample, double s) {
    sample.validate();
    std::size_t below = 0, equal = 0;
    for (double v : sample.train_scores) {
        if (v < s)
            ++below;
        else if (v == s)
            ++equal;
    }
    return (static_cast<double>(below) + 0.5 * static_cast<double>(equal)) /
           static_cast<double>(sample.train_scores.size());
}

double weight_at(const ScoredSample& sample, double s) {
    const double f = empirical_cdf_train(sample, s);
    return f * f;
}

double wauc(const ScoredSample& sample) {
    sample.validate();
    std::vector<double> train = sample.train_scores;
    std::vector<double> test = sample.test_scores;
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());

    const double n = static_cast<double>(train.size());
    const double m = static_cast<double>(test.size());

    double total = 0.0;
    std::size_t i = 0;
    while (i < train.size()) {
        // tie group [i, j) in the sorted train scores
        std::size_t j = i;
        while (j < train.size() && train[j] == train[i]) ++j;
        const double s = train[i];
        // midrank CDF: (#below + 0.5 * #equal) / n
        const double f = (static_cast<double>(i) + 0.5 * static_cast<double>(j - i)) / n;
        const auto lo = std::lower_bound(test.begin(), test.end(), s);
        const auto hi = std::upper_bound(lo, test.end(), s);
        const double above = static_cast<double>(test.end() - hi);
        const double equal = static_cast<double>(hi - lo);
        const double c_te = (above + 0.5 * equal) / m;
        total += static_cast<double>(j - i) * c_te * f * f;
        i = j;
    }
    return total / n;
}

AsymptoticNull asymptotic_null(std::size_t n_train, std::size_t n_test) {
    if (n_train == 0 || n_test == 0)
        throw std::invalid_argument("asymptotic_null: sample sizes must be positive");
    AsymptoticNull null{};
    null.mean = 1.0 / 12.0;
    null.a1 = 1.0 / 112.0;
    null.delta = static_cast<double>(n_test) / static_cast<double>(n_train);
    null.sd = std::sqrt(null.a1 * (null.delta + 1.0) / static_cast<double>(n_test));
    return null;
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double p_value_asymptotic(double t0, const AsymptoticNull& null) {
    if (!std::isfinite(t0)) throw std::invalid_argument("p_value_asymptotic: non-finite statistic");
    return normal_upper_tail((t0 - null.mean) / null.sd);
}

double s_value(double p, double cap_bits) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("s_value: p must lie in [0, 1]");
    if (p == 0.0) return cap_bits;
    return std::min(-std::log2(p), cap_bits);
}

} // namespace dsos
