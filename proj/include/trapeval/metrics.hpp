#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trapeval/harness.hpp"

namespace trapeval::metrics {

struct ConfusionCounts {
    uint64_t tp = 0;
    uint64_t fp = 0;
    uint64_t tn = 0;
    uint64_t fn = 0;
    uint64_t unparsed = 0; // responses that matched no canonical sentence

    uint64_t classified() const { return tp + fp + tn + fn; }
};

// Percentages carry full precision; rendering rounds to two decimals.
// A metric whose denominator is zero is absent and excluded from comparisons.
struct MetricsReport {
    ConfusionCounts counts;
    uint64_t records = 0;        // records aggregated, including unparsed
    bool strict_unparsed = false; // active unparsed handling, recorded per report
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::optional<double> fpr;

    double unparsed_rate() const {
        return records == 0 ? 0.0
                            : static_cast<double>(counts.unparsed) /
                                  static_cast<double>(records);
    }
};

// Ratio computation from a filled confusion matrix.
MetricsReport metrics_from_counts(const ConfusionCounts& counts,
                                  bool strict_unparsed = false);

// Aggregates prediction records. By default unparsed responses stay out of
// the matrix and are reported as a count and rate; in strict mode they are
// scored as "safe" answers instead. Throws EmptyInput on no records.
MetricsReport compute_metrics(const std::vector<harness::PredictionRecord>& records,
                              bool strict_unparsed = false);

struct EvalCell {
    std::optional<MetricsReport> report;
    std::string error; // failure description when the cell could not be computed
};

// One metrics cell per (model, test set), both in first-appearance order.
struct CrossEvalResult {
    std::vector<std::string> models;
    std::vector<std::string> test_sets;
    std::vector<std::vector<EvalCell>> cells; // indexed [model][test_set]
};

// A cell failure is captured in that cell; the other cells still compute.
// Throws EmptyInput when there are no records at all.
CrossEvalResult cross_eval(const std::vector<harness::PredictionRecord>& records,
                           bool strict_unparsed = false);

struct CwePairedReport {
    std::string cwe;
    MetricsReport original;
    MetricsReport augmented;
};

// Per-CWE reports over the original and augmented record sets, joined to CWE
// tags through the sample id. Throws MissingSubset when either side has no
// records for a requested CWE.
std::vector<CwePairedReport> cwe_subset_eval(
    const std::vector<harness::PredictionRecord>& original,
    const std::vector<harness::PredictionRecord>& augmented,
    const std::map<std::string, std::vector<std::string>>& cwes_by_sample,
    const std::vector<std::string>& cwes, bool strict_unparsed = false);

struct BucketAssignment {
    std::string bucket;
    std::string pair_id;
};

struct BucketReport {
    std::optional<MetricsReport> report; // absent for empty buckets
    uint64_t pair_count = 0;
};

// Metrics stratified by similarity bucket. Requires pairwise records: every
// sample id must carry an assignment and both members of each pair must be
// present, otherwise ConfigError. Buckets with no pairs report a zero count.
std::map<std::string, BucketReport> gap_stratified_eval(
    const std::vector<harness::PredictionRecord>& records,
    const std::map<std::string, BucketAssignment>& assignment_by_sample,
    bool strict_unparsed = false);

} // namespace trapeval::metrics
