#include "trapeval/metrics.hpp"

#include <algorithm>
#include <set>

#include "trapeval/codebleu.hpp"
#include "trapeval/common.hpp"

namespace trapeval::metrics {

namespace {

std::optional<double> percent(uint64_t numerator, uint64_t denominator) {
    if (denominator == 0) return std::nullopt;
    return 100.0 * static_cast<double>(numerator) / static_cast<double>(denominator);
}

ConfusionCounts tally(const std::vector<harness::PredictionRecord>& records,
                      bool strict_unparsed) {
    ConfusionCounts c;
    for (const auto& r : records) {
        harness::Verdict verdict = r.verdict;
        if (verdict == harness::Verdict::Unparsed) {
            ++c.unparsed;
            if (!strict_unparsed) continue;
            verdict = harness::Verdict::Safe; // strict mode scores them as "safe"
        }
        bool positive = verdict == harness::Verdict::Vulnerable;
        bool truly_positive = r.ground_truth == harness::Truth::Vulnerable;
        if (positive && truly_positive) ++c.tp;
        else if (positive && !truly_positive) ++c.fp;
        else if (!positive && truly_positive) ++c.fn;
        else ++c.tn;
    }
    return c;
}

} // namespace

MetricsReport metrics_from_counts(const ConfusionCounts& counts,
                                  bool strict_unparsed) {
    MetricsReport m;
    m.counts = counts;
    m.strict_unparsed = strict_unparsed;
    m.records = counts.classified() + (strict_unparsed ? 0 : counts.unparsed);
    m.accuracy = percent(counts.tp + counts.tn, counts.classified());
    m.precision = percent(counts.tp, counts.tp + counts.fp);
    m.recall = percent(counts.tp, counts.tp + counts.fn);
    if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0) {
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    }
    m.fpr = percent(counts.fp, counts.fp + counts.tn);
    return m;
}

MetricsReport compute_metrics(const std::vector<harness::PredictionRecord>& records,
                              bool strict_unparsed) {
    if (records.empty()) throw EmptyInput("no prediction records");
    MetricsReport m = metrics_from_counts(tally(records, strict_unparsed),
                                          strict_unparsed);
    m.records = records.size();
    return m;
}

CrossEvalResult cross_eval(const std::vector<harness::PredictionRecord>& records,
                           bool strict_unparsed) {
    if (records.empty()) throw EmptyInput("no prediction records");
    CrossEvalResult result;
    std::map<std::string, size_t> model_index;
    std::map<std::string, size_t> set_index;
    for (const auto& r : records) {
        if (!model_index.count(r.model_id)) {
            model_index[r.model_id] = result.models.size();
            result.models.push_back(r.model_id);
        }
        if (!set_index.count(r.dataset_tag)) {
            set_index[r.dataset_tag] = result.test_sets.size();
            result.test_sets.push_back(r.dataset_tag);
        }
    }
    std::map<std::pair<size_t, size_t>, std::vector<harness::PredictionRecord>>
        groups;
    for (const auto& r : records) {
        groups[{model_index[r.model_id], set_index[r.dataset_tag]}].push_back(r);
    }
    result.cells.assign(result.models.size(),
                        std::vector<EvalCell>(result.test_sets.size()));
    for (size_t m = 0; m < result.models.size(); ++m) {
        for (size_t s = 0; s < result.test_sets.size(); ++s) {
            EvalCell& cell = result.cells[m][s];
            auto it = groups.find({m, s});
            if (it == groups.end()) {
                cell.error = "no records";
                continue;
            }
            try {
                cell.report = compute_metrics(it->second, strict_unparsed);
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
        }
    }
    return result;
}

namespace {

std::vector<harness::PredictionRecord> filter_by_cwe(
    const std::vector<harness::PredictionRecord>& records,
    const std::map<std::string, std::vector<std::string>>& cwes_by_sample,
    const std::string& cwe) {
    std::vector<harness::PredictionRecord> out;
    for (const auto& r : records) {
        auto it = cwes_by_sample.find(r.sample_id);
        if (it == cwes_by_sample.end()) continue;
        if (std::find(it->second.begin(), it->second.end(), cwe) !=
            it->second.end()) {
            out.push_back(r);
        }
    }
    return out;
}

} // namespace

std::vector<CwePairedReport> cwe_subset_eval(
    const std::vector<harness::PredictionRecord>& original,
    const std::vector<harness::PredictionRecord>& augmented,
    const std::map<std::string, std::vector<std::string>>& cwes_by_sample,
    const std::vector<std::string>& cwes, bool strict_unparsed) {
    std::vector<CwePairedReport> out;
    for (const auto& cwe : cwes) {
        auto orig = filter_by_cwe(original, cwes_by_sample, cwe);
        if (orig.empty()) {
            throw MissingSubset("no original test records for " + cwe);
        }
        auto aug = filter_by_cwe(augmented, cwes_by_sample, cwe);
        if (aug.empty()) {
            throw MissingSubset("no augmented test records for " + cwe);
        }
        CwePairedReport rep;
        rep.cwe = cwe;
        rep.original = compute_metrics(orig, strict_unparsed);
        rep.augmented = compute_metrics(aug, strict_unparsed);
        out.push_back(std::move(rep));
    }
    return out;
}

std::map<std::string, BucketReport> gap_stratified_eval(
    const std::vector<harness::PredictionRecord>& records,
    const std::map<std::string, BucketAssignment>& assignment_by_sample,
    bool strict_unparsed) {
    std::map<std::string, std::vector<harness::PredictionRecord>> grouped;
    std::map<std::string, std::map<std::string, int>> pair_members; // bucket -> pair -> n
    for (const auto& r : records) {
        auto it = assignment_by_sample.find(r.sample_id);
        if (it == assignment_by_sample.end()) {
            throw ConfigError("sample " + r.sample_id +
                              " has no similarity bucket; stratified evaluation "
                              "requires pairwise records");
        }
        grouped[it->second.bucket].push_back(r);
        ++pair_members[it->second.bucket][it->second.pair_id];
    }
    std::map<std::string, BucketReport> out;
    for (const auto& bucket : codebleu::bucket_order()) {
        BucketReport rep;
        auto members = pair_members.find(bucket);
        if (members != pair_members.end()) {
            for (const auto& [pair_id, n] : members->second) {
                if (n != 2) {
                    throw ConfigError("pair " + pair_id + " has " +
                                      std::to_string(n) +
                                      " members in the record set; pairs must be "
                                      "complete");
                }
                ++rep.pair_count;
            }
            rep.report = compute_metrics(grouped[bucket], strict_unparsed);
        }
        out[bucket] = std::move(rep);
    }
    return out;
}

} // namespace trapeval::metrics
