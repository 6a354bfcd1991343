#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trapeval/metrics.hpp"

namespace trapeval::report {

struct Cell {
    std::optional<double> value; // absent renders as an em dash
    bool down = false;           // marked with a trailing down arrow
    bool is_count = false;       // rendered as an integer instead of 2 decimals
};

struct Table {
    std::vector<std::string> columns;    // header, excluding the row-label column
    std::vector<std::string> row_labels;
    std::vector<std::vector<Cell>> cells; // cells[row][col]
};

// GitHub-style pipe table. Metric cells round to two decimals, counts render
// as integers, absent values as an em dash, marked cells get a down arrow.
std::string to_markdown(const Table& table);

// Lossless CSV: metric values keep full precision and always carry a decimal
// point, counts never do, absent cells are empty, markers keep the arrow.
// Labels and headers must be comma/quote/newline-free (ConfigError).
std::string to_csv(const Table& table);

// Inverse of to_csv: re-ingesting a written table reproduces the same
// markdown byte for byte. Throws SchemaError on malformed input.
Table from_csv(const std::string& csv_text);

// Marks every metric cell of an augmented row ("... a" label) that is
// strictly below the same cell of the original row right above it ("... o").
Table with_down_markers(Table table);

// Rows = models; per test set the five metric columns, in canonical order.
Table cross_eval_table(const metrics::CrossEvalResult& result);

// Adjacent o/a row pairs per (model, CWE) with drop markers precomputed.
Table cwe_subset_table(const std::string& model,
                       const std::vector<metrics::CwePairedReport>& reports);

// Rows = retained similarity buckets for one model; metric columns plus the
// pair count.
Table gap_table(const std::string& model,
                const std::map<std::string, metrics::BucketReport>& buckets);

// Rows = retained similarity buckets plus the separate excluded row; single
// count column.
Table bucket_count_table(const std::map<std::string, uint64_t>& counts);

} // namespace trapeval::report
