#include "dsos/report.hpp"

#include "dsos/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace dsos;

namespace {

TestReport sample_report() {
    TestReport report;
    report.command = "test";
    report.data = {800, 4, "00ff00ff00ff00ff"};
    report.params = {{"method", "at"}, {"scorer", "anomaly"}, {"seed", "42"}};
    report.alpha = 0.05;
    report.verdict = "no-adverse-shift";
    ReportEntry entry;
    entry.notion = "anomaly";
    entry.method = "AT";
    entry.statistic = 0.1 + 0.2; // awkward double on purpose
    entry.p_value = 7.43e-17;
    entry.s_value = 53.58342;
    entry.null_mean = 1.0 / 12.0;
    entry.null_sd = 0.0066815;
    entry.n_train = 400;
    entry.n_test = 400;
    entry.seed = 42;
    report.results.push_back(entry);
    return report;
}

} // namespace

TEST_CASE("report json round-trips losslessly") {
    const TestReport report = sample_report();
    const std::string json = report_to_json(report);
    const TestReport back = report_from_json(json);
    CHECK(back.schema_version == report.schema_version);
    CHECK(back.tool_version == report.tool_version);
    CHECK(back.command == report.command);
    CHECK(back.data.content_hash == report.data.content_hash);
    CHECK(back.params == report.params);
    CHECK(*back.alpha == *report.alpha);
    CHECK(*back.verdict == *report.verdict);
    REQUIRE(back.results.size() == 1);
    // doubles must survive the trip bit-for-bit
    CHECK(back.results[0].statistic == report.results[0].statistic);
    CHECK(back.results[0].p_value == report.results[0].p_value);
    CHECK(back.results[0].s_value == report.results[0].s_value);
    CHECK(*back.results[0].null_sd == *report.results[0].null_sd);
    CHECK(*back.results[0].seed == 42);
    // serialization is stable
    CHECK(report_to_json(back) == json);
}

TEST_CASE("unknown schema version is rejected") {
    std::string json = report_to_json(sample_report());
    const auto pos = json.find("\"schema_version\": 1");
    REQUIRE(pos != std::string::npos);
    json.replace(pos, 19, "\"schema_version\": 2");
    CHECK_THROWS_WITH_AS(report_from_json(json), doctest::Contains("schema_version"),
                         std::runtime_error);
    CHECK_THROWS_AS(report_from_json("not json at all"), std::runtime_error);
    CHECK_THROWS_AS(report_from_json("{}"), std::runtime_error);
}

TEST_CASE("panel entries keep errors") {
    TestReport report = sample_report();
    report.command = "panel";
    ReportEntry failed;
    failed.notion = "residual";
    failed.method = "AT";
    failed.error = "residual scorer requires a label column";
    report.results.push_back(failed);
    const TestReport back = report_from_json(report_to_json(report));
    REQUIRE(back.results.size() == 2);
    CHECK(back.results[1].error == failed.error);
    const std::string text = format_report(back);
    CHECK(text.find("residual scorer requires") != std::string::npos);
}

TEST_CASE("fingerprint reacts to any content change") {
    Rng rng(3);
    Matrix train(10, 3), test(5, 3);
    for (std::size_t r = 0; r < 10; ++r)
        for (std::size_t c = 0; c < 3; ++c) train(r, c) = rng.normal();
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 3; ++c) test(r, c) = rng.normal();
    Dataset data = Dataset::from_pair(std::move(train), test);

    const std::string base = fingerprint_hex(data);
    CHECK(base == fingerprint_hex(data));
    CHECK(base.size() == 16);

    Dataset tweaked = data;
    tweaked.features(0, 0) += 1e-12;
    CHECK(fingerprint_hex(tweaked) != base);

    Dataset relabeled = data;
    relabeled.origin[0] = Origin::test;
    CHECK(fingerprint_hex(relabeled) != base);

    Dataset labeled = data;
    LabelColumn lc;
    lc.kind = LabelKind::numeric;
    lc.values.assign(data.n_rows(), 0.0);
    labeled.label = lc;
    CHECK(fingerprint_hex(labeled) != base);

    const auto fp = fingerprint(data);
    CHECK(fp.n_rows == 15);
    CHECK(fp.n_features == 3);
    CHECK(fp.content_hash == base);
}
