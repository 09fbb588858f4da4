#include "acceptance_util.hpp"
#include "test_helpers.hpp"

#include "dsos/rng.hpp"
#include "dsos/wauc.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <sstream>
#include <vector>

using namespace dsos;

TEST_CASE("criterion 1: fast wauc equals the double-loop oracle") {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(101);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = 2 + rng.below(250);
        const std::size_t m = 2 + rng.below(250);
        std::vector<double> train(n), test(m);
        const bool tied = rep % 2 == 1;
        for (auto& v : train) v = tied ? std::floor(rng.uniform() * 12.0) : rng.normal();
        for (auto& v : test) v = tied ? std::floor(rng.uniform() * 12.0) : rng.normal();
        worst = std::max(worst,
                         std::abs(wauc({train, test}) - test::wauc_double_loop(train, test)));
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream detail;
    detail << "max |fast - oracle| = " << worst << " over 1000 samples in " << seconds << " s";
    acceptance::report(1, worst <= 1e-12 && seconds < 10.0, detail.str());
}

TEST_CASE("criterion 2: exchangeable null mean and sd at n=200") {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(202);
    const std::size_t reps = 2000;
    std::vector<double> stats(reps);
    for (auto& t : stats) {
        std::vector<double> train(200), test(200);
        for (auto& v : train) v = rng.uniform();
        for (auto& v : test) v = rng.uniform();
        t = wauc({train, test});
    }
    const double mean = test::mean(stats);
    const double sd = test::sample_sd(stats);
    const double se = sd / std::sqrt(static_cast<double>(reps));
    const auto null = asymptotic_null(200, 200);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const bool mean_ok = std::abs(mean - null.mean) <= 4.0 * se;
    const bool sd_ok = std::abs(sd - null.sd) <= 0.15 * null.sd;
    std::ostringstream detail;
    detail << "mean " << mean << " vs 1/12 (|dev| = " << std::abs(mean - null.mean) / se
           << " SE); sd " << sd << " vs " << null.sd << " ("
           << 100.0 * std::abs(sd - null.sd) / null.sd << "% off); " << seconds << " s";
    acceptance::report(2, mean_ok && sd_ok && seconds < 60.0, detail.str());
}
