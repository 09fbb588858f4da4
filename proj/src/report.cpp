#include "dsos/report.hpp"

#include <json.hpp>

#include <cstring>
#include <sstream>

namespace dsos {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(const void* bytes, std::size_t len, std::uint64_t hash) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < len; ++i) {
        hash ^= p[i];
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::uint64_t fnv1a_u64(std::uint64_t value, std::uint64_t hash) {
    return fnv1a(&value, sizeof(value), hash);
}

std::uint64_t fnv1a_double(double value, std::uint64_t hash) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    return fnv1a_u64(bits, hash);
}

} // namespace

std::string fingerprint_hex(const Dataset& data) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    hash = fnv1a_u64(data.n_rows(), hash);
    hash = fnv1a_u64(data.n_features(), hash);
    for (double v : data.features.data()) hash = fnv1a_double(v, hash);
    for (Origin o : data.origin) hash = fnv1a_u64(static_cast<std::uint64_t>(o), hash);
    if (data.label) {
        hash = fnv1a_u64(data.label->kind == LabelKind::categorical ? 1 : 2, hash);
        for (double v : data.label->values) hash = fnv1a_double(v, hash);
        for (const auto& c : data.label->classes) hash = fnv1a(c.data(), c.size(), hash);
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << hash;
    return out.str();
}

DataFingerprint fingerprint(const Dataset& data) {
    return {data.n_rows(), data.n_features(), fingerprint_hex(data)};
}

ReportEntry entry_from_result(const WaucResult& result) {
    ReportEntry entry;
    entry.method = method_name(result.method);
    entry.statistic = result.statistic;
    entry.p_value = result.p_value;
    entry.s_value = result.s_value;
    entry.null_mean = result.null_mean;
    entry.null_sd = result.null_sd;
    entry.n_train = result.n_train;
    entry.n_test = result.n_test;
    entry.seed = result.seed;
    entry.permutations = result.permutations_used;
    return entry;
}

namespace {

json entry_to_json(const ReportEntry& e) {
    json j;
    if (e.notion) j["notion"] = *e.notion;
    j["method"] = e.method;
    if (e.error) {
        j["error"] = *e.error;
        return j;
    }
    j["statistic"] = e.statistic;
    j["p_value"] = e.p_value;
    j["s_value"] = e.s_value;
    j["null_mean"] = e.null_mean;
    if (e.null_sd) j["null_sd"] = *e.null_sd;
    j["n_train"] = e.n_train;
    j["n_test"] = e.n_test;
    if (e.seed) j["seed"] = *e.seed;
    if (e.permutations) j["permutations"] = *e.permutations;
    return j;
}

ReportEntry entry_from_json(const json& j) {
    ReportEntry e;
    if (j.contains("notion")) e.notion = j["notion"].get<std::string>();
    e.method = j.at("method").get<std::string>();
    if (j.contains("error")) {
        e.error = j["error"].get<std::string>();
        return e;
    }
    e.statistic = j.at("statistic").get<double>();
    e.p_value = j.at("p_value").get<double>();
    e.s_value = j.at("s_value").get<double>();
    e.null_mean = j.at("null_mean").get<double>();
    if (j.contains("null_sd")) e.null_sd = j["null_sd"].get<double>();
    e.n_train = j.at("n_train").get<std::size_t>();
    e.n_test = j.at("n_test").get<std::size_t>();
    if (j.contains("seed")) e.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("permutations")) e.permutations = j["permutations"].get<std::size_t>();
    return e;
}

} // namespace

std::string report_to_json(const TestReport& report) {
    json j;
    j["schema_version"] = report.schema_version;
    j["tool_version"] = report.tool_version;
    j["command"] = report.command;
    j["data"] = {{"n_rows", report.data.n_rows},
                 {"n_features", report.data.n_features},
                 {"content_hash", report.data.content_hash}};
    j["params"] = report.params;
    if (report.alpha) j["alpha"] = *report.alpha;
    if (report.verdict) j["verdict"] = *report.verdict;
    json entries = json::array();
    for (const auto& e : report.results) entries.push_back(entry_to_json(e));
    j["results"] = std::move(entries);
    return j.dump(2) + "\n";
}

TestReport report_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("report: invalid JSON: ") + e.what());
    }
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
        throw std::runtime_error("report: missing schema_version");
    const int version = j["schema_version"].get<int>();
    if (version != kReportSchemaVersion)
        throw std::runtime_error("report: unknown schema_version " + std::to_string(version) +
                                 " (this tool reads version " +
                                 std::to_string(kReportSchemaVersion) + ")");

    TestReport report;
    report.schema_version = version;
    report.tool_version = j.at("tool_version").get<std::string>();
    report.command = j.at("command").get<std::string>();
    const auto& data = j.at("data");
    report.data.n_rows = data.at("n_rows").get<std::size_t>();
    report.data.n_features = data.at("n_features").get<std::size_t>();
    report.data.content_hash = data.at("content_hash").get<std::string>();
    if (j.contains("params"))
        report.params = j["params"].get<std::map<std::string, std::string>>();
    if (j.contains("alpha")) report.alpha = j["alpha"].get<double>();
    if (j.contains("verdict")) report.verdict = j["verdict"].get<std::string>();
    for (const auto& e : j.at("results")) report.results.push_back(entry_from_json(e));
    return report;
}

std::string format_report(const TestReport& report) {
    std::ostringstream out;
    out << "command: " << report.command << " (tool " << report.tool_version << ", schema "
        << report.schema_version << ")\n";
    out << "data: " << report.data.n_rows << " rows x " << report.data.n_features
        << " features, hash " << report.data.content_hash << "\n";
    if (report.alpha) out << "alpha: " << *report.alpha << "\n";
    if (report.verdict) out << "verdict: " << *report.verdict << "\n";
    for (const auto& e : report.results) {
        out << "  -";
        if (e.notion) out << " notion=" << *e.notion;
        out << " method=" << e.method;
        if (e.error) {
            out << " error=\"" << *e.error << "\"\n";
            continue;
        }
        out << " statistic=" << e.statistic << " p=" << e.p_value << " s=" << e.s_value
            << " n_train=" << e.n_train << " n_test=" << e.n_test;
        if (e.permutations) out << " permutations=" << *e.permutations;
        out << "\n";
    }
    if (!report.params.empty()) {
        out << "params:\n";
        for (const auto& [k, v] : report.params) out << "  " << k << " = " << v << "\n";
    }
    return out.str();
}

} // namespace dsos
