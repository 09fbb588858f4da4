#include "dsos/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dsos {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw std::runtime_error(where + ": " + what);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

bool parse_double(const std::string& text, double& out) {
    if (text.empty()) return false;
    const char* begin = text.c_str();
    char* end = nullptr;
    errno = 0;
    out = std::strtod(begin, &end);
    return errno == 0 && end == begin + text.size();
}

bool is_missing_token(const std::string& v) {
    return v.empty() || v == "NA" || v == "NaN" || v == "nan" || v == "NULL" || v == "null";
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name,
                        const std::string& where) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(where, "no column named '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

} // namespace

CsvTable parse_csv(const std::string& text, const std::string& origin_for_errors) {
    CsvTable table;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool saw_any = false;

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
    };
    auto end_record = [&] {
        end_field();
        if (table.header.empty())
            table.header = std::move(record);
        else {
            if (record.size() != table.header.size())
                fail(origin_for_errors, "row " + std::to_string(table.rows.size() + 1) + " has " +
                                            std::to_string(record.size()) + " fields, expected " +
                                            std::to_string(table.header.size()));
            table.rows.push_back(std::move(record));
        }
        record = {};
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        saw_any = true;
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r') {
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
            end_record();
        } else if (c == '\n') {
            end_record();
        } else {
            field.push_back(c);
        }
    }
    if (quoted) fail(origin_for_errors, "unterminated quoted field");
    if (!field.empty() || !record.empty()) end_record();
    if (!saw_any || table.header.empty()) fail(origin_for_errors, "empty file");
    return table;
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_file(path), path); }

namespace {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

} // namespace

std::string csv_to_string(const CsvTable& table) {
    std::ostringstream out;
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << csv_escape(table.header[i]);
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(row[i]);
        out << "\n";
    }
    return out.str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(path, "cannot open for writing");
        out << content;
        if (!out) fail(path, "write failed");
    }
    fs::rename(tmp, target);
}

void write_csv(const std::string& path, const CsvTable& table) {
    write_text_atomic(path, csv_to_string(table));
}

namespace {

struct RawRows {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<Origin> origin;
};

IngestResult assemble(const RawRows& raw, const IngestOptions& options,
                      const std::string& where, bool require_both_origins = true) {
    std::optional<std::size_t> label_col;
    if (options.label_column)
        label_col = find_column(raw.header, *options.label_column, where);

    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < raw.header.size(); ++c)
        if (!(label_col && c == *label_col)) feature_cols.push_back(c);
    if (feature_cols.empty()) fail(where, "no feature columns left");
    if (raw.rows.empty()) fail(where, "no data rows");

    // Column typing: a feature column is numeric when every cell parses.
    // Missing tokens are rejected with coordinates.
    struct ColumnPlan {
        std::size_t source;
        bool numeric;
        std::vector<std::string> categories; // sorted, for one-hot
    };
    std::vector<ColumnPlan> plans;
    for (const std::size_t c : feature_cols) {
        ColumnPlan plan{c, true, {}};
        std::set<std::string> values;
        for (std::size_t r = 0; r < raw.rows.size(); ++r) {
            const std::string& cell = raw.rows[r][c];
            if (is_missing_token(cell))
                fail(where, "missing value at row " + std::to_string(r + 1) + ", column '" +
                                raw.header[c] + "'");
            double ignored;
            if (!parse_double(cell, ignored)) {
                plan.numeric = false;
                values.insert(cell);
            } else if (!std::isfinite(ignored)) {
                fail(where, "non-finite value at row " + std::to_string(r + 1) + ", column '" +
                                raw.header[c] + "'");
            }
        }
        if (!plan.numeric) {
            if (!options.one_hot)
                fail(where, "non-numeric column '" + raw.header[c] +
                                "' (pass one-hot encoding to expand it)");
            // sweep again so numeric-looking cells of a categorical column count as categories
            for (const auto& row : raw.rows) values.insert(row[c]);
            plan.categories.assign(values.begin(), values.end());
        }
        plans.push_back(std::move(plan));
    }

    IngestResult result;
    for (const auto& plan : plans) {
        if (plan.numeric)
            result.feature_names.push_back(raw.header[plan.source]);
        else
            for (const auto& cat : plan.categories)
                result.feature_names.push_back(raw.header[plan.source] + "=" + cat);
    }

    Matrix features(raw.rows.size(), result.feature_names.size());
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        std::size_t out_c = 0;
        for (const auto& plan : plans) {
            const std::string& cell = raw.rows[r][plan.source];
            if (plan.numeric) {
                double v = 0.0;
                parse_double(cell, v);
                features(r, out_c++) = v;
            } else {
                for (const auto& cat : plan.categories) features(r, out_c++) = cell == cat ? 1.0 : 0.0;
            }
        }
    }

    result.dataset.features = std::move(features);
    result.dataset.origin = raw.origin;

    if (label_col) {
        LabelColumn label;
        bool numeric = true;
        for (std::size_t r = 0; r < raw.rows.size(); ++r) {
            const std::string& cell = raw.rows[r][*label_col];
            if (is_missing_token(cell))
                fail(where, "missing label at row " + std::to_string(r + 1));
            double ignored;
            if (!parse_double(cell, ignored)) numeric = false;
        }
        if (numeric) {
            label.kind = LabelKind::numeric;
            for (const auto& row : raw.rows) {
                double v = 0.0;
                parse_double(row[*label_col], v);
                label.values.push_back(v);
            }
        } else {
            label.kind = LabelKind::categorical;
            std::set<std::string> classes;
            for (const auto& row : raw.rows) classes.insert(row[*label_col]);
            label.classes.assign(classes.begin(), classes.end());
            for (const auto& row : raw.rows) {
                const auto it =
                    std::find(label.classes.begin(), label.classes.end(), row[*label_col]);
                label.values.push_back(static_cast<double>(it - label.classes.begin()));
            }
        }
        result.dataset.label = std::move(label);
    }

    if (require_both_origins) result.dataset.validate();
    return result;
}

} // namespace

IngestResult ingest_csv(const std::string& path, const IngestOptions& options) {
    if (!options.origin_column)
        throw std::invalid_argument("ingest_csv: single-file mode needs an origin column");
    CsvTable table = read_csv(path);
    const std::size_t origin_col = find_column(table.header, *options.origin_column, path);

    RawRows raw;
    for (std::size_t c = 0; c < table.header.size(); ++c)
        if (c != origin_col) raw.header.push_back(table.header[c]);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string& tag = table.rows[r][origin_col];
        if (tag == "train")
            raw.origin.push_back(Origin::train);
        else if (tag == "test")
            raw.origin.push_back(Origin::test);
        else
            fail(path, "row " + std::to_string(r + 1) + ": origin must be 'train' or 'test', got '" +
                           tag + "'");
        std::vector<std::string> row;
        for (std::size_t c = 0; c < table.header.size(); ++c)
            if (c != origin_col) row.push_back(table.rows[r][c]);
        raw.rows.push_back(std::move(row));
    }

    IngestOptions rest = options;
    rest.origin_column.reset();
    return assemble(raw, rest, path);
}

IngestResult ingest_csv_presplit(const std::string& path, const IngestOptions& options) {
    if (options.origin_column)
        throw std::invalid_argument("ingest_csv_presplit: origin column not supported");
    CsvTable table = read_csv(path);
    RawRows raw;
    raw.header = table.header;
    raw.rows = table.rows;
    raw.origin.assign(table.rows.size(), Origin::train);
    return assemble(raw, options, path, /*require_both_origins=*/false);
}

IngestResult ingest_csv_pair(const std::string& train_path, const std::string& test_path,
                             const IngestOptions& options) {
    CsvTable train = read_csv(train_path);
    CsvTable test = read_csv(test_path);
    if (train.header != test.header) {
        std::string diff;
        for (const auto& h : train.header)
            if (std::find(test.header.begin(), test.header.end(), h) == test.header.end())
                diff += " '" + h + "' (train only)";
        for (const auto& h : test.header)
            if (std::find(train.header.begin(), train.header.end(), h) == train.header.end())
                diff += " '" + h + "' (test only)";
        if (diff.empty()) diff = " (same names, different order)";
        fail(train_path + " vs " + test_path, "header mismatch:" + diff);
    }

    RawRows raw;
    raw.header = train.header;
    raw.rows = train.rows;
    raw.rows.insert(raw.rows.end(), test.rows.begin(), test.rows.end());
    raw.origin.assign(train.rows.size(), Origin::train);
    raw.origin.insert(raw.origin.end(), test.rows.size(), Origin::test);
    return assemble(raw, options, train_path + "+" + test_path);
}

} // namespace dsos
