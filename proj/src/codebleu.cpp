#include "trapeval/codebleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "trapeval/common.hpp"
#include "trapeval/syntax.hpp"

namespace trapeval::codebleu {

namespace {

std::vector<std::string> significant_tokens(const std::string& text) {
    std::vector<std::string> out;
    for (const auto& t : syntax::tokenize(text)) out.push_back(t.text);
    return out;
}

// Length-prefixed join makes the encoding injective regardless of the
// bytes inside individual tokens.
std::string gram_key(const std::vector<std::string>& toks, size_t begin, size_t n) {
    std::string key;
    for (size_t i = begin; i < begin + n; ++i) {
        key += std::to_string(toks[i].size());
        key += ':';
        key += toks[i];
    }
    return key;
}

struct GramCount {
    uint32_t count = 0;
    bool keyword = false;
};

std::map<std::string, GramCount> count_ngrams(const std::vector<std::string>& toks,
                                              size_t n,
                                              const std::set<std::string>* keywords) {
    std::map<std::string, GramCount> out;
    if (toks.size() < n) return out;
    for (size_t i = 0; i + n <= toks.size(); ++i) {
        GramCount& g = out[gram_key(toks, i, n)];
        if (g.count == 0 && keywords) {
            for (size_t j = i; j < i + n; ++j) {
                if (keywords->count(toks[j])) {
                    g.keyword = true;
                    break;
                }
            }
        }
        ++g.count;
    }
    return out;
}

double bleu_impl(const std::vector<std::string>& ref,
                 const std::vector<std::string>& cand, int n_max,
                 const std::set<std::string>* keywords) {
    if (ref.empty() || cand.empty()) throw EmptyText("empty token stream");
    double log_sum = 0.0;
    int orders = 0;
    for (int n = 1; n <= n_max; ++n) {
        auto cg = count_ngrams(cand, static_cast<size_t>(n), keywords);
        if (cg.empty()) continue; // candidate too short for this order
        auto rg = count_ngrams(ref, static_cast<size_t>(n), keywords);
        double num = 0.0;
        double den = 0.0;
        for (const auto& [key, g] : cg) {
            double w = g.keyword ? 5.0 : 1.0;
            auto it = rg.find(key);
            uint32_t clipped = it == rg.end() ? 0 : std::min(g.count, it->second.count);
            num += w * clipped;
            den += w * g.count;
        }
        if (num == 0.0) num = 1.0; // add-one smoothing on the numerator only
        log_sum += std::log(num / den);
        ++orders;
    }
    double score = std::exp(log_sum / orders);
    // Brevity penalty on raw token counts.
    if (cand.size() <= ref.size()) {
        score *= std::exp(1.0 - static_cast<double>(ref.size()) /
                                    static_cast<double>(cand.size()));
    }
    return score;
}

syntax::SyntaxTree parse_clean(const std::string& code) {
    auto tree = syntax::parse(code, Language::Cpp);
    if (tree.has_error) throw ParseError("code does not parse");
    return tree;
}

uint64_t multiset_total(const std::map<std::string, uint32_t>& m) {
    uint64_t total = 0;
    for (const auto& [k, c] : m) total += c;
    return total;
}

uint64_t multiset_intersection(const std::map<std::string, uint32_t>& a,
                               const std::map<std::string, uint32_t>& b) {
    uint64_t total = 0;
    for (const auto& [k, c] : a) {
        auto it = b.find(k);
        if (it != b.end()) total += std::min(c, it->second);
    }
    return total;
}

std::map<std::string, uint32_t> edge_multiset(const syntax::SyntaxTree& t) {
    std::map<std::string, uint32_t> out;
    for (const auto& e : syntax::dataflow_edges(t)) {
        std::string key = e.name;
        key += '\x1f';
        key += std::to_string(e.def_tok);
        key += '\x1f';
        key += std::to_string(e.use_tok);
        ++out[key];
    }
    return out;
}

} // namespace

void validate(const Weights& w) {
    if (w.ngram < 0.0 || w.weighted_ngram < 0.0 || w.ast < 0.0 || w.dataflow < 0.0) {
        throw ConfigError("component weights must be non-negative");
    }
    double sum = w.ngram + w.weighted_ngram + w.ast + w.dataflow;
    if (std::fabs(sum - 1.0) > 1e-12) {
        throw ConfigError("component weights must sum to 1");
    }
}

double ngram_bleu(const std::string& reference, const std::string& candidate,
                  int n_max) {
    return bleu_impl(significant_tokens(reference), significant_tokens(candidate),
                     n_max, nullptr);
}

double weighted_ngram_bleu(const std::string& reference, const std::string& candidate,
                           const std::vector<std::string>& keywords, int n_max) {
    std::set<std::string> kw(keywords.begin(), keywords.end());
    return bleu_impl(significant_tokens(reference), significant_tokens(candidate),
                     n_max, &kw);
}

double ast_match(const std::string& reference, const std::string& candidate) {
    auto ref_sub = syntax::subtrees(parse_clean(reference));
    auto cand_sub = syntax::subtrees(parse_clean(candidate));
    uint64_t total = multiset_total(cand_sub);
    if (total == 0) return 0.0;
    return static_cast<double>(multiset_intersection(cand_sub, ref_sub)) /
           static_cast<double>(total);
}

std::optional<double> dataflow_match(const std::string& reference,
                                     const std::string& candidate) {
    auto ref_edges = edge_multiset(parse_clean(reference));
    auto cand_edges = edge_multiset(parse_clean(candidate));
    uint64_t ref_total = multiset_total(ref_edges);
    if (ref_total == 0) return std::nullopt;
    return static_cast<double>(multiset_intersection(cand_edges, ref_edges)) /
           static_cast<double>(ref_total);
}

const std::vector<std::string>& builtin_keywords() {
    static const std::vector<std::string> kw =
        load_keywords(std::string(TRAPEVAL_DATA_DIR) + "/cpp_keywords.txt");
    return kw;
}

Score score_pair(const std::string& vulnerable, const std::string& patched,
                 const Weights& weights, const std::vector<std::string>& keywords) {
    validate(weights);
    Score s;
    s.ngram = ngram_bleu(vulnerable, patched);
    s.weighted_ngram = weighted_ngram_bleu(vulnerable, patched, keywords);
    s.ast = ast_match(vulnerable, patched);
    s.dataflow = dataflow_match(vulnerable, patched);
    double weighted = weights.ngram * s.ngram +
                      weights.weighted_ngram * s.weighted_ngram +
                      weights.ast * s.ast;
    double total_w = weights.ngram + weights.weighted_ngram + weights.ast;
    if (s.dataflow.has_value()) {
        weighted += weights.dataflow * *s.dataflow;
        total_w += weights.dataflow;
    } else if (total_w == 0.0) {
        throw ConfigError(
            "data-flow component undefined and all other weights are zero");
    }
    s.composite = weighted / total_w;
    return s;
}

std::vector<std::string> load_keywords(const std::string& path) {
    std::string text = read_file(path);
    std::vector<std::string> out;
    std::string line;
    for (size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '\n') {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) out.push_back(line);
            line.clear();
        } else {
            line += text[i];
        }
    }
    return out;
}

std::string bucket_label(double composite) {
    if (composite > 0.95) return ">0.95";
    if (composite > 0.90) return "0.90-0.95";
    if (composite > 0.85) return "0.85-0.90";
    if (composite > 0.80) return "0.80-0.85";
    if (composite > 0.75) return "0.75-0.80";
    return "excluded";
}

const std::vector<std::string>& bucket_order() {
    static const std::vector<std::string> order = {
        ">0.95", "0.90-0.95", "0.85-0.90", "0.80-0.85", "0.75-0.80", "excluded",
    };
    return order;
}

} // namespace trapeval::codebleu
