#pragma once

#include "dsos/dataset.hpp"
#include "dsos/wauc.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dsos {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct DataFingerprint {
    std::size_t n_rows = 0;
    std::size_t n_features = 0;
    std::string content_hash; // fnv1a-64 hex over features, origins and labels
};

struct ReportEntry {
    std::optional<std::string> notion; // panel entries carry their notion
    std::string method;
    double statistic = 0.0;
    double p_value = 1.0;
    double s_value = 0.0;
    double null_mean = 0.0;
    std::optional<double> null_sd;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> permutations;
    std::optional<std::string> error; // panel-entry failure
};

struct TestReport {
    int schema_version = kReportSchemaVersion;
    std::string tool_version = kToolVersion;
    std::string command; // "test" or "panel"
    DataFingerprint data;
    std::map<std::string, std::string> params; // invocation parameters
    std::optional<double> alpha;
    std::optional<std::string> verdict; // "no-adverse-shift" | "adverse-shift"
    std::vector<ReportEntry> results;
};

ReportEntry entry_from_result(const WaucResult& result);

// Stable, key-sorted JSON; round-trips losslessly through report_from_json.
std::string report_to_json(const TestReport& report);

// Throws std::runtime_error on malformed input or unknown schema_version.
TestReport report_from_json(const std::string& json_text);

// Human-readable rendering for the pretty-printer.
std::string format_report(const TestReport& report);

std::string fingerprint_hex(const Dataset& data);
DataFingerprint fingerprint(const Dataset& data);

} // namespace dsos
