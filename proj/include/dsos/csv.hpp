#pragma once

#include "dsos/dataset.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dsos {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// RFC 4180: quoted fields, doubled-quote escapes, CRLF or LF, header required.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& origin_for_errors = "<csv>");

// Serializes with minimal quoting and writes via temp-file + rename.
void write_csv(const std::string& path, const CsvTable& table);
std::string csv_to_string(const CsvTable& table);

// Plain atomic text write (temp + rename in the destination directory).
void write_text_atomic(const std::string& path, const std::string& content);

struct IngestOptions {
    std::optional<std::string> label_column;
    std::optional<std::string> origin_column; // single-file mode; values train/test
    bool one_hot = false;                     // one-hot encode non-numeric feature columns
};

struct IngestResult {
    Dataset dataset;
    std::vector<std::string> feature_names; // post one-hot expansion
};

// Single-file mode: an origin column assigns rows to train/test.
IngestResult ingest_csv(const std::string& path, const IngestOptions& options);

// Two-file mode: identical headers required; origins assigned by file.
IngestResult ingest_csv_pair(const std::string& train_path, const std::string& test_path,
                             const IngestOptions& options);

// Single file without an origin column; every row is marked train so the
// caller can assign origins afterwards (split presets do this).
IngestResult ingest_csv_presplit(const std::string& path, const IngestOptions& options);

} // namespace dsos
