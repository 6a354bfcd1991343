#pragma once

#include <optional>
#include <string>
#include <vector>

namespace trapeval::codebleu {

struct Weights {
    double ngram = 0.25;
    double weighted_ngram = 0.25;
    double ast = 0.25;
    double dataflow = 0.25;
};

// Throws ConfigError unless all weights are non-negative and sum to 1
// within 1e-12.
void validate(const Weights& w);

struct Score {
    double ngram = 0.0;
    double weighted_ngram = 0.0;
    double ast = 0.0;
    std::optional<double> dataflow; // absent when the reference has no edges
    double composite = 0.0;
};

// Geometric mean of clipped n-gram precisions for n = 1..n_max with add-one
// smoothing on the numerator of zero precisions, times the brevity penalty.
// Texts are tokenized with the code lexer. Throws EmptyText when either side
// has no significant tokens.
double ngram_bleu(const std::string& reference, const std::string& candidate,
                  int n_max = 4);

// Same, but every n-gram containing a keyword counts five times a plain one,
// in both clipped matches and totals.
double weighted_ngram_bleu(const std::string& reference, const std::string& candidate,
                           const std::vector<std::string>& keywords, int n_max = 4);

// Multiset intersection of subtree encodings over the candidate's total.
// Throws ParseError when either side has a parse error.
double ast_match(const std::string& reference, const std::string& candidate);

// Multiset intersection of def-use edges over the reference's edge count;
// nullopt when the reference has no edges. Throws ParseError.
std::optional<double> dataflow_match(const std::string& reference,
                                     const std::string& candidate);

const std::vector<std::string>& builtin_keywords();

// Full score with reference = vulnerable code, candidate = patched code.
// An undefined dataflow component is dropped and the remaining weights
// renormalized.
Score score_pair(const std::string& vulnerable, const std::string& patched,
                 const Weights& weights = {},
                 const std::vector<std::string>& keywords = builtin_keywords());

// One keyword per line; blank lines ignored. Throws IoError.
std::vector<std::string> load_keywords(const std::string& path);

// ">0.95", "0.90-0.95", "0.85-0.90", "0.80-0.85", "0.75-0.80" (half-open
// (lower, upper] intervals), or "excluded" for composites <= 0.75.
std::string bucket_label(double composite);

// Fixed rendering order: the five retained buckets, then "excluded".
const std::vector<std::string>& bucket_order();

} // namespace trapeval::codebleu
