#include "trapeval/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "trapeval/common.hpp"
#include "trapeval/digest.hpp"
#include "trapeval/prompt.hpp"
#include "trapeval/rng.hpp"

namespace trapeval::corpus {

using nlohmann::json;

std::string_view label_name(Label l) {
    switch (l) {
        case Label::Vulnerable: return "vulnerable";
        case Label::Patched: return "patched";
        case Label::Normal: return "normal";
    }
    return "";
}

std::string_view source_name(Source s) {
    switch (s) {
        case Source::PrimeVul: return "primevul";
        case Source::DiverseVul: return "diversevul";
        case Source::CVEFixes: return "cvefixes";
        case Source::Synthetic: return "synthetic";
    }
    return "";
}

std::string_view language_name(Language l) {
    return l == Language::C ? "c" : "cpp";
}

Label parse_label(std::string_view s) {
    if (s == "vulnerable") return Label::Vulnerable;
    if (s == "patched") return Label::Patched;
    if (s == "normal") return Label::Normal;
    throw std::invalid_argument("unknown label: " + std::string(s));
}

Source parse_source(std::string_view s) {
    if (s == "primevul") return Source::PrimeVul;
    if (s == "diversevul") return Source::DiverseVul;
    if (s == "cvefixes") return Source::CVEFixes;
    if (s == "synthetic") return Source::Synthetic;
    throw std::invalid_argument("unknown source: " + std::string(s));
}

Language parse_language(std::string_view s) {
    if (s == "c") return Language::C;
    if (s == "cpp") return Language::Cpp;
    throw std::invalid_argument("unknown language: " + std::string(s));
}

std::string compute_id(std::string_view code) {
    return sha256_hex(normalize_code(code));
}

void cache_fingerprint(FunctionSample& s) {
    syntax::SyntaxTree tree = syntax::parse(s.code, s.language);
    if (tree.has_error) {
        s.fingerprint.reset();
        return;
    }
    try {
        s.fingerprint = syntax::function_name(tree);
    } catch (const std::runtime_error&) {
        s.fingerprint.reset();
    }
}

namespace {

bool valid_cwe(std::string_view s) {
    if (s.size() < 5 || s.substr(0, 4) != "CWE-") return false;
    for (char c : s.substr(4)) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

FunctionSample sample_from_json(const json& j, size_t line_no) {
    auto need_string = [&](const char* key) -> std::string {
        if (!j.contains(key) || !j[key].is_string()) {
            throw SchemaError(line_no, std::string("missing or non-string field \"") + key + "\"");
        }
        return j[key].get<std::string>();
    };
    FunctionSample s;
    s.code = need_string("code");
    if (s.code.empty()) throw SchemaError(line_no, "empty \"code\" field");
    try {
        s.label = parse_label(need_string("label"));
        s.source = parse_source(need_string("source"));
        s.language = parse_language(need_string("language"));
    } catch (const std::invalid_argument& e) {
        throw SchemaError(line_no, e.what());
    }
    s.commit_id = need_string("commit_id");
    if (j.contains("project")) s.project = need_string("project");
    if (j.contains("cwes")) {
        if (!j["cwes"].is_array()) throw SchemaError(line_no, "\"cwes\" must be an array");
        for (const auto& c : j["cwes"]) {
            if (!c.is_string() || !valid_cwe(c.get<std::string>())) {
                throw SchemaError(line_no, "cwes entries must match CWE-<digits>");
            }
            s.cwes.push_back(c.get<std::string>());
        }
    }
    return s;
}

json sample_to_json(const FunctionSample& s) {
    json j;
    j["id"] = s.id;
    j["code"] = s.code;
    j["label"] = std::string(label_name(s.label));
    j["commit_id"] = s.commit_id;
    j["project"] = s.project;
    j["cwes"] = s.cwes;
    j["source"] = std::string(source_name(s.source));
    j["language"] = std::string(language_name(s.language));
    return j;
}

} // namespace

LoadResult load_corpus(const std::string& path) {
    std::string content = read_file(path);
    LoadResult result;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos < content.size()) {
        size_t eol = content.find('\n', pos);
        if (eol == std::string::npos) eol = content.size();
        std::string line = content.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw SchemaError(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) throw SchemaError(line_no, "record is not an object");
        FunctionSample s = sample_from_json(j, line_no);
        std::string recomputed = compute_id(s.code);
        if (j.contains("id")) {
            if (!j["id"].is_string()) throw SchemaError(line_no, "\"id\" must be a string");
            if (j["id"].get<std::string>() != recomputed) ++result.id_mismatch_warnings;
        }
        s.id = recomputed;
        cache_fingerprint(s);
        result.samples.push_back(std::move(s));
    }
    return result;
}

void write_corpus(const std::string& path, const std::vector<FunctionSample>& samples) {
    std::string out;
    for (const auto& s : samples) {
        out += sample_to_json(s).dump();
        out += '\n';
    }
    write_file(path, out);
}

namespace {

int source_priority(Source s) {
    switch (s) {
        case Source::PrimeVul: return 0;
        case Source::DiverseVul: return 1;
        case Source::CVEFixes: return 2;
        case Source::Synthetic: return 3;
    }
    return 4;
}

} // namespace

std::vector<FunctionSample> dedup_and_resolve(const std::vector<FunctionSample>& samples,
                                              DedupReport* report) {
    DedupReport local;
    // Group key -> index of the current survivor in `out`.
    std::map<std::pair<std::string, std::string>, size_t> survivor;
    std::vector<FunctionSample> out;
    std::set<std::pair<std::string, std::string>> conflicted;
    for (const auto& s : samples) {
        auto key = std::make_pair(s.id, s.commit_id);
        auto it = survivor.find(key);
        if (it == survivor.end()) {
            survivor.emplace(key, out.size());
            out.push_back(s);
            continue;
        }
        ++local.duplicates_dropped;
        FunctionSample& kept = out[it->second];
        if (kept.label != s.label && conflicted.insert(key).second) {
            ++local.label_conflicts;
        }
        // First occurrence wins within a source, so only a strictly higher
        // priority replaces the survivor.
        if (source_priority(s.source) < source_priority(kept.source)) {
            kept = s;
        }
    }
    std::map<std::string, std::set<std::string>> commits_per_id;
    for (const auto& s : out) commits_per_id[s.id].insert(s.commit_id);
    for (const auto& [id, commits] : commits_per_id) {
        if (commits.size() > 1) ++local.cross_commit_duplicate_ids;
    }
    if (report) *report = local;
    return out;
}

std::string pair_id(const SamplePair& p) {
    return p.positive.id + ":" + p.negative.id;
}

std::vector<SamplePair> pair_v2p(const std::vector<FunctionSample>& samples,
                                 PairReport* report) {
    PairReport local;
    // commit_id -> indices, preserving input order of first appearance.
    std::vector<std::string> commit_order;
    std::map<std::string, std::vector<size_t>> by_commit;
    for (size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (s.label == Label::Normal) continue;
        auto [it, fresh] = by_commit.try_emplace(s.commit_id);
        if (fresh) commit_order.push_back(s.commit_id);
        it->second.push_back(i);
    }
    std::vector<SamplePair> pairs;
    for (const auto& commit : commit_order) {
        const auto& members = by_commit[commit];
        std::vector<size_t> patched_pool;
        for (size_t i : members) {
            const auto& s = samples[i];
            if (!s.fingerprint) {
                ++local.skipped_unparsable;
                continue;
            }
            if (s.label == Label::Patched) patched_pool.push_back(i);
        }
        std::vector<bool> used(patched_pool.size(), false);
        for (size_t i : members) {
            const auto& vuln = samples[i];
            if (vuln.label != Label::Vulnerable || !vuln.fingerprint) continue;
            size_t candidates = 0;
            size_t chosen = SIZE_MAX;
            for (size_t k = 0; k < patched_pool.size(); ++k) {
                const auto& patched = samples[patched_pool[k]];
                if (used[k] || patched.fingerprint != vuln.fingerprint) continue;
                if (patched.id == vuln.id) continue;
                ++candidates;
                if (chosen == SIZE_MAX) chosen = k;
            }
            if (chosen == SIZE_MAX) {
                local.unpaired_vulnerable.push_back(vuln);
                continue;
            }
            if (candidates > 1) ++local.ambiguous_matches;
            used[chosen] = true;
            SamplePair p;
            p.kind = PairKind::V2P;
            p.positive = vuln;
            p.negative = samples[patched_pool[chosen]];
            pairs.push_back(std::move(p));
        }
    }
    if (report) *report = local;
    return pairs;
}

std::vector<SamplePair> pair_v2n(const std::vector<FunctionSample>& samples,
                                 const std::vector<SamplePair>& v2p_pairs,
                                 uint64_t seed) {
    // A normal that matches a positive's commit and name could be the same
    // logical function; keep it out of the pool so every drawn negative
    // differs from its positive in name or commit.
    std::set<std::pair<std::string, std::string>> positive_keys;
    for (const auto& p : v2p_pairs) {
        if (p.positive.fingerprint) {
            positive_keys.emplace(p.positive.commit_id, *p.positive.fingerprint);
        }
    }
    std::vector<size_t> pool;
    for (size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (s.label != Label::Normal) continue;
        if (s.fingerprint && positive_keys.count({s.commit_id, *s.fingerprint})) continue;
        pool.push_back(i);
    }
    if (pool.size() < v2p_pairs.size()) {
        throw InsufficientNormals("normal pool has " + std::to_string(pool.size()) +
                                  " samples, need " + std::to_string(v2p_pairs.size()));
    }
    Rng rng(mix_seed(seed, "v2n", 0));
    rng.shuffle(pool);
    std::vector<SamplePair> out;
    out.reserve(v2p_pairs.size());
    for (size_t i = 0; i < v2p_pairs.size(); ++i) {
        SamplePair p;
        p.kind = PairKind::V2N;
        p.positive = v2p_pairs[i].positive;
        p.negative = samples[pool[i]];
        out.push_back(std::move(p));
    }
    return out;
}

namespace {

json pair_to_json(const SamplePair& p) {
    json j;
    j["kind"] = p.kind == PairKind::V2P ? "v2p" : "v2n";
    j["positive"] = sample_to_json(p.positive);
    j["negative"] = sample_to_json(p.negative);
    if (p.codebleu) {
        const auto& s = *p.codebleu;
        json sc;
        sc["ngram"] = s.ngram;
        sc["weighted_ngram"] = s.weighted_ngram;
        sc["ast"] = s.ast;
        if (s.dataflow) sc["dataflow"] = *s.dataflow;
        else sc["dataflow"] = nullptr;
        sc["composite"] = s.composite;
        j["codebleu"] = sc;
    } else {
        j["codebleu"] = nullptr;
    }
    return j;
}

} // namespace

void write_pairs(const std::string& path, const std::vector<SamplePair>& pairs) {
    std::string out;
    for (const auto& p : pairs) {
        out += pair_to_json(p).dump();
        out += '\n';
    }
    write_file(path, out);
}

std::vector<SamplePair> load_pairs(const std::string& path) {
    std::string content = read_file(path);
    std::vector<SamplePair> pairs;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos < content.size()) {
        size_t eol = content.find('\n', pos);
        if (eol == std::string::npos) eol = content.size();
        std::string line = content.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw SchemaError(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object() || !j.contains("kind") || !j.contains("positive") ||
            !j.contains("negative")) {
            throw SchemaError(line_no, "pair record needs kind/positive/negative");
        }
        SamplePair p;
        std::string kind = j["kind"].get<std::string>();
        if (kind == "v2p") p.kind = PairKind::V2P;
        else if (kind == "v2n") p.kind = PairKind::V2N;
        else throw SchemaError(line_no, "unknown pair kind: " + kind);
        p.positive = sample_from_json(j["positive"], line_no);
        p.positive.id = compute_id(p.positive.code);
        cache_fingerprint(p.positive);
        p.negative = sample_from_json(j["negative"], line_no);
        p.negative.id = compute_id(p.negative.code);
        cache_fingerprint(p.negative);
        if (j.contains("codebleu") && !j["codebleu"].is_null()) {
            const json& sc = j["codebleu"];
            codebleu::Score s;
            s.ngram = sc.at("ngram").get<double>();
            s.weighted_ngram = sc.at("weighted_ngram").get<double>();
            s.ast = sc.at("ast").get<double>();
            if (!sc.at("dataflow").is_null()) s.dataflow = sc["dataflow"].get<double>();
            s.composite = sc.at("composite").get<double>();
            p.codebleu = s;
        }
        pairs.push_back(std::move(p));
    }
    return pairs;
}

namespace {

size_t train_count(size_t n, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw ConfigError("split ratio must lie in (0, 1)");
    }
    auto k = static_cast<size_t>(std::llround(ratio * static_cast<double>(n)));
    return std::min(k, n);
}

std::vector<size_t> shuffled_indices(size_t n, uint64_t seed) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    Rng rng(mix_seed(seed, "split", 0));
    rng.shuffle(idx);
    return idx;
}

} // namespace

PairSplit split_pairwise(const std::vector<SamplePair>& pairs, double ratio, uint64_t seed) {
    if (pairs.empty()) throw EmptyInput("no pairs to split");
    size_t k = train_count(pairs.size(), ratio);
    auto idx = shuffled_indices(pairs.size(), seed);
    PairSplit split;
    for (size_t i = 0; i < idx.size(); ++i) {
        (i < k ? split.train : split.test).push_back(pairs[idx[i]]);
    }
    return split;
}

std::vector<FunctionSample> flatten_pairs(const std::vector<SamplePair>& pairs) {
    std::vector<FunctionSample> out;
    out.reserve(pairs.size() * 2);
    for (const auto& p : pairs) {
        out.push_back(p.positive);
        out.push_back(p.negative);
    }
    return out;
}

SampleSplit split_samples(const std::vector<FunctionSample>& samples, double ratio,
                          uint64_t seed) {
    if (samples.empty()) throw EmptyInput("no samples to split");
    size_t k = train_count(samples.size(), ratio);
    auto idx = shuffled_indices(samples.size(), seed);
    SampleSplit split;
    for (size_t i = 0; i < idx.size(); ++i) {
        (i < k ? split.train : split.test).push_back(samples[idx[i]]);
    }
    return split;
}

SampleSplit split_samplewise(const std::vector<SamplePair>& pairs, double ratio,
                             uint64_t seed) {
    return split_samples(flatten_pairs(pairs), ratio, seed);
}

void export_sft(const std::string& path, const std::vector<FunctionSample>& train) {
    if (train.empty()) throw EmptyInput("no training samples to export");
    std::string out;
    for (const auto& s : train) {
        json user;
        user["role"] = "user";
        user["content"] = prompt::render_prompt(s.code, prompt::TemplateMode::FineTuned);
        json assistant;
        assistant["role"] = "assistant";
        assistant["content"] = s.label == Label::Vulnerable ? "The code is vulnerable."
                                                            : "The code is safe.";
        json rec;
        rec["messages"] = json::array({user, assistant});
        out += rec.dump();
        out += '\n';
    }
    write_file(path, out);
}

} // namespace trapeval::corpus
