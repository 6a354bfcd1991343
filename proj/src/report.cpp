#include "trapeval/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "trapeval/codebleu.hpp"
#include "trapeval/common.hpp"

namespace trapeval::report {

namespace {

constexpr const char* kAbsent = "—";    // em dash
constexpr const char* kDownArrow = "↓"; // ↓

void check_label(const std::string& text) {
    for (char c : text) {
        if (c == ',' || c == '"' || c == '|' || c == '\n' || c == '\r') {
            throw ConfigError("table labels must not contain separators: " + text);
        }
    }
}

void check_shape(const Table& t) {
    if (t.row_labels.size() != t.cells.size()) {
        throw ConfigError("table has " + std::to_string(t.row_labels.size()) +
                          " row labels but " + std::to_string(t.cells.size()) +
                          " cell rows");
    }
    for (const auto& row : t.cells) {
        if (row.size() != t.columns.size()) {
            throw ConfigError("table row width does not match the header");
        }
    }
    for (const auto& c : t.columns) check_label(c);
    for (const auto& r : t.row_labels) check_label(r);
}

std::string markdown_cell(const Cell& c) {
    if (!c.value.has_value()) return kAbsent;
    char buf[64];
    if (c.is_count) {
        std::snprintf(buf, sizeof(buf), "%lld",
                      static_cast<long long>(std::llround(*c.value)));
    } else {
        std::snprintf(buf, sizeof(buf), "%.2f", *c.value);
    }
    std::string out = buf;
    if (c.down) out += kDownArrow;
    return out;
}

std::string csv_cell(const Cell& c) {
    if (!c.value.has_value()) return "";
    char buf[64];
    std::string out;
    if (c.is_count) {
        std::snprintf(buf, sizeof(buf), "%lld",
                      static_cast<long long>(std::llround(*c.value)));
        out = buf;
    } else {
        std::snprintf(buf, sizeof(buf), "%.17g", *c.value);
        out = buf;
        // a metric value always carries a decimal point so that re-ingestion
        // can tell it apart from a count
        if (out.find('.') == std::string::npos &&
            out.find('e') == std::string::npos &&
            out.find("inf") == std::string::npos &&
            out.find("nan") == std::string::npos) {
            out += ".0";
        }
    }
    if (c.down) out += kDownArrow;
    return out;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

Cell parse_cell(std::string text, size_t line_no) {
    Cell c;
    if (text.empty()) return c;
    const std::string arrow = kDownArrow;
    if (text.size() >= arrow.size() &&
        text.compare(text.size() - arrow.size(), arrow.size(), arrow) == 0) {
        c.down = true;
        text.resize(text.size() - arrow.size());
    }
    if (text.empty()) throw SchemaError(line_no, "marker without a value");
    errno = 0;
    char* end = nullptr;
    double value = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || errno != 0) {
        throw SchemaError(line_no, "not a numeric cell: " + text);
    }
    c.value = value;
    c.is_count = text.find('.') == std::string::npos &&
                 text.find('e') == std::string::npos &&
                 text.find('E') == std::string::npos;
    return c;
}

} // namespace

std::string to_markdown(const Table& t) {
    check_shape(t);
    std::ostringstream out;
    out << "| ";
    for (const auto& c : t.columns) out << " | " << c;
    out << " |\n|";
    for (size_t i = 0; i <= t.columns.size(); ++i) out << " --- |";
    out << '\n';
    for (size_t r = 0; r < t.row_labels.size(); ++r) {
        out << "| " << t.row_labels[r];
        for (const auto& cell : t.cells[r]) out << " | " << markdown_cell(cell);
        out << " |\n";
    }
    return out.str();
}

std::string to_csv(const Table& t) {
    check_shape(t);
    std::ostringstream out;
    for (const auto& c : t.columns) out << ',' << c;
    out << '\n';
    for (size_t r = 0; r < t.row_labels.size(); ++r) {
        out << t.row_labels[r];
        for (const auto& cell : t.cells[r]) out << ',' << csv_cell(cell);
        out << '\n';
    }
    return out.str();
}

Table from_csv(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    size_t line_no = 0;
    Table t;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (!have_header) {
            t.columns.assign(fields.begin() + 1, fields.end());
            have_header = true;
            continue;
        }
        if (fields.size() != t.columns.size() + 1) {
            throw SchemaError(line_no, "expected " +
                                           std::to_string(t.columns.size() + 1) +
                                           " fields, found " +
                                           std::to_string(fields.size()));
        }
        t.row_labels.push_back(fields[0]);
        std::vector<Cell> row;
        for (size_t i = 1; i < fields.size(); ++i) {
            row.push_back(parse_cell(fields[i], line_no));
        }
        t.cells.push_back(std::move(row));
    }
    if (!have_header) throw SchemaError(1, "empty table");
    return t;
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

Table with_down_markers(Table t) {
    for (size_t r = 1; r < t.row_labels.size(); ++r) {
        if (!(t.row_labels[r] == "a" || ends_with(t.row_labels[r], " a"))) continue;
        if (!(t.row_labels[r - 1] == "o" || ends_with(t.row_labels[r - 1], " o"))) {
            continue;
        }
        for (size_t c = 0; c < t.columns.size(); ++c) {
            Cell& aug = t.cells[r][c];
            const Cell& orig = t.cells[r - 1][c];
            if (aug.is_count || orig.is_count) continue;
            if (aug.value && orig.value && *aug.value < *orig.value) {
                aug.down = true;
            }
        }
    }
    return t;
}

namespace {

const std::vector<std::pair<const char*,
                            std::optional<double> metrics::MetricsReport::*>>&
metric_fields() {
    static const std::vector<
        std::pair<const char*, std::optional<double> metrics::MetricsReport::*>>
        fields = {{"acc", &metrics::MetricsReport::accuracy},
                  {"pre", &metrics::MetricsReport::precision},
                  {"rec", &metrics::MetricsReport::recall},
                  {"f1", &metrics::MetricsReport::f1},
                  {"fpr", &metrics::MetricsReport::fpr}};
    return fields;
}

Cell metric_cell(const std::optional<metrics::MetricsReport>& report,
                 std::optional<double> metrics::MetricsReport::*field) {
    Cell c;
    if (report.has_value()) c.value = (*report).*field;
    return c;
}

} // namespace

Table cross_eval_table(const metrics::CrossEvalResult& result) {
    Table t;
    for (const auto& set : result.test_sets) {
        for (const auto& [name, field] : metric_fields()) {
            t.columns.push_back(set + " " + name);
        }
    }
    for (size_t m = 0; m < result.models.size(); ++m) {
        t.row_labels.push_back(result.models[m]);
        std::vector<Cell> row;
        for (size_t s = 0; s < result.test_sets.size(); ++s) {
            const auto& cell = result.cells[m][s];
            for (const auto& [name, field] : metric_fields()) {
                row.push_back(metric_cell(cell.report, field));
            }
        }
        t.cells.push_back(std::move(row));
    }
    return t;
}

Table cwe_subset_table(const std::string& model,
                       const std::vector<metrics::CwePairedReport>& reports) {
    Table t;
    for (const auto& [name, field] : metric_fields()) t.columns.push_back(name);
    for (const auto& rep : reports) {
        t.row_labels.push_back(model + " / " + rep.cwe + " o");
        std::vector<Cell> orig_row;
        for (const auto& [name, field] : metric_fields()) {
            orig_row.push_back(metric_cell(rep.original, field));
        }
        t.cells.push_back(std::move(orig_row));

        t.row_labels.push_back(model + " / " + rep.cwe + " a");
        std::vector<Cell> aug_row;
        for (const auto& [name, field] : metric_fields()) {
            Cell c = metric_cell(rep.augmented, field);
            const auto orig = rep.original.*field;
            if (c.value && orig && *c.value < *orig) c.down = true;
            aug_row.push_back(c);
        }
        t.cells.push_back(std::move(aug_row));
    }
    return t;
}

Table gap_table(const std::string& model,
                const std::map<std::string, metrics::BucketReport>& buckets) {
    Table t;
    t.columns = {"f1", "acc", "pre", "rec", "fpr", "count"};
    for (const auto& bucket : codebleu::bucket_order()) {
        if (bucket == "excluded") continue;
        t.row_labels.push_back(model + " / " + bucket);
        metrics::BucketReport empty;
        const metrics::BucketReport* rep = &empty;
        auto it = buckets.find(bucket);
        if (it != buckets.end()) rep = &it->second;
        std::vector<Cell> row;
        row.push_back(metric_cell(rep->report, &metrics::MetricsReport::f1));
        row.push_back(metric_cell(rep->report, &metrics::MetricsReport::accuracy));
        row.push_back(metric_cell(rep->report, &metrics::MetricsReport::precision));
        row.push_back(metric_cell(rep->report, &metrics::MetricsReport::recall));
        row.push_back(metric_cell(rep->report, &metrics::MetricsReport::fpr));
        Cell count;
        count.value = static_cast<double>(rep->pair_count);
        count.is_count = true;
        row.push_back(count);
        t.cells.push_back(std::move(row));
    }
    return t;
}

Table bucket_count_table(const std::map<std::string, uint64_t>& counts) {
    Table t;
    t.columns = {"count"};
    for (const auto& bucket : codebleu::bucket_order()) {
        t.row_labels.push_back(bucket);
        Cell c;
        auto it = counts.find(bucket);
        c.value = static_cast<double>(it == counts.end() ? 0 : it->second);
        c.is_count = true;
        t.cells.push_back({c});
    }
    return t;
}

} // namespace trapeval::report
