#include "trapeval/perturb.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "trapeval/common.hpp"
#include "trapeval/rng.hpp"
#include "trapeval/syntax.hpp"

namespace trapeval::perturb {

using nlohmann::json;

std::string_view kind_name(Kind k) {
    switch (k) {
        case Kind::RenameParams: return "RenameParams";
        case Kind::RenameFunction: return "RenameFunction";
        case Kind::UnreachableCode: return "UnreachableCode";
        case Kind::CommentNoise: return "CommentNoise";
        case Kind::WhitespaceNoise: return "WhitespaceNoise";
        case Kind::RedundantFunction: return "RedundantFunction";
        case Kind::LineBreakNoise: return "LineBreakNoise";
    }
    return "";
}

Kind parse_kind(std::string_view name) {
    for (Kind k : kAllKinds) {
        if (kind_name(k) == name) return k;
    }
    throw ConfigError("unknown perturbation kind: " + std::string(name));
}

std::string_view status_name(Status s) {
    switch (s) {
        case Status::Applied: return "applied";
        case Status::SkippedUnparsable: return "skipped_unparsable";
        case Status::SkippedNoSite: return "skipped_no_site";
    }
    return "";
}

namespace {

const std::vector<std::string>& default_comment_pool() {
    static const std::vector<std::string> pool = {
        "audit trail entry",
        "reviewed during cleanup",
        "refactor pending",
        "see issue tracker",
        "checked against upstream",
        "kept for binary compatibility",
    };
    return pool;
}

const std::vector<std::string>& default_dead_stmt_pool() {
    static const std::vector<std::string> pool = {
        "int $ID = 0;",
        "unsigned int $ID = 0u;",
        "char $ID = 'x';",
        "long $ID = 1;",
    };
    return pool;
}

std::string fresh_identifier(Rng& rng, const std::set<std::string>& taken,
                             const Config& cfg, Language lang) {
    static const char kAlnum[] = "abcdefghijklmnopqrstuvwxyz0123456789";
    for (;;) {
        auto len = rng.range(static_cast<uint64_t>(cfg.min_identifier_len),
                             static_cast<uint64_t>(cfg.max_identifier_len));
        std::string s;
        s += static_cast<char>('a' + rng.index(26));
        while (s.size() < len) s += kAlnum[rng.index(36)];
        if (!taken.count(s) && !syntax::is_keyword(s, lang)) return s;
    }
}

// Replacements as (begin, end, text), applied back to front.
std::string splice(const std::string& code,
                   std::vector<std::tuple<uint32_t, uint32_t, std::string>> edits) {
    std::sort(edits.begin(), edits.end(),
              [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
    std::string out = code;
    for (auto it = edits.rbegin(); it != edits.rend(); ++it) {
        out.replace(std::get<0>(*it), std::get<1>(*it) - std::get<0>(*it),
                    std::get<2>(*it));
    }
    return out;
}

// Ascending distinct site choice: shuffle, truncate, re-sort.
std::vector<uint32_t> choose_sites(std::vector<uint32_t> sites, size_t want, Rng& rng) {
    rng.shuffle(sites);
    if (sites.size() > want) sites.resize(want);
    std::sort(sites.begin(), sites.end());
    return sites;
}

// Byte offsets where a statement/comment can go, across all functions.
std::vector<uint32_t> all_insertion_offsets(const syntax::SyntaxTree& tree) {
    std::vector<uint32_t> offsets;
    for (uint32_t fn : syntax::function_definitions(tree)) {
        auto per_fn = syntax::statement_insertion_offsets(tree, fn);
        offsets.insert(offsets.end(), per_fn.begin(), per_fn.end());
    }
    std::sort(offsets.begin(), offsets.end());
    offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
    return offsets;
}

bool on_preproc_line(const std::string& code, uint32_t offset) {
    size_t line_start = code.rfind('\n', offset == 0 ? 0 : offset - 1);
    line_start = line_start == std::string::npos ? 0 : line_start + 1;
    size_t first = code.find_first_not_of(" \t", line_start);
    return first != std::string::npos && first < offset && code[first] == '#';
}

std::string apply_rename(const syntax::SyntaxTree& tree, const std::string& code,
                         syntax::RenameTarget target, Rng& rng, const Config& cfg,
                         Language lang, Status& status) {
    std::vector<std::string> names;
    if (target == syntax::RenameTarget::Parameter) {
        auto fns = syntax::function_definitions(tree);
        std::set<std::string> seen;
        for (uint32_t fn : fns) {
            for (uint32_t tok : syntax::parameter_name_tokens(tree, fn)) {
                std::string n(tree.raw_text(tok));
                if (seen.insert(n).second) names.push_back(n);
            }
        }
    } else {
        try {
            names.push_back(syntax::function_name(tree));
        } catch (const std::runtime_error&) {
            status = Status::SkippedNoSite;
            return code;
        }
    }
    if (names.empty()) {
        status = Status::SkippedNoSite;
        return code;
    }
    std::set<std::string> taken = syntax::identifier_texts(tree);
    std::vector<std::tuple<uint32_t, uint32_t, std::string>> edits;
    for (const std::string& name : names) {
        std::string fresh = fresh_identifier(rng, taken, cfg, lang);
        taken.insert(fresh);
        for (auto [b, e] : syntax::rename_spans(tree, name, target)) {
            edits.emplace_back(b, e, fresh);
        }
    }
    if (edits.empty()) {
        status = Status::SkippedNoSite;
        return code;
    }
    status = Status::Applied;
    return splice(code, std::move(edits));
}

std::string apply_unreachable(const syntax::SyntaxTree& tree, const std::string& code,
                              Rng& rng, const Config& cfg, Language lang, Status& status) {
    auto fns = syntax::function_definitions(tree);
    if (fns.empty()) {
        status = Status::SkippedNoSite;
        return code;
    }
    uint32_t body = syntax::function_body(tree, fns.front());
    if (body == UINT32_MAX) {
        status = Status::SkippedNoSite;
        return code;
    }
    // opening brace is the first significant leaf of the body
    uint32_t brace_end = 0;
    bool found = false;
    for (uint32_t c : tree.nodes[body].children) {
        const auto& n = tree.nodes[c];
        if (n.kind == syntax::NodeKind::Leaf && tree.raw_text(n.first_raw) == "{") {
            brace_end = tree.raw[n.first_raw].end;
            found = true;
            break;
        }
    }
    if (!found) {
        status = Status::SkippedNoSite;
        return code;
    }
    const auto& pool = cfg.dead_stmt_pool.empty() ? default_dead_stmt_pool()
                                                  : cfg.dead_stmt_pool;
    std::set<std::string> taken = syntax::identifier_texts(tree);
    auto count = rng.range(1, std::min<uint64_t>(3, pool.size()));
    std::string block = "\n    if (0) {";
    for (uint64_t i = 0; i < count; ++i) {
        std::string stmt = pool[rng.index(pool.size())];
        std::string fresh = fresh_identifier(rng, taken, cfg, lang);
        taken.insert(fresh);
        size_t at;
        while ((at = stmt.find("$ID")) != std::string::npos) {
            stmt.replace(at, 3, fresh);
        }
        block += " " + stmt;
    }
    block += " }";
    std::string out = code;
    out.insert(brace_end, block);
    status = Status::Applied;
    return out;
}

std::string apply_comment_noise(const syntax::SyntaxTree& tree, const std::string& code,
                                Rng& rng, const Config& cfg, Status& status) {
    auto sites = all_insertion_offsets(tree);
    if (sites.empty()) {
        status = Status::SkippedNoSite;
        return code;
    }
    auto chosen = choose_sites(sites, static_cast<size_t>(cfg.max_insertions), rng);
    const auto& pool = cfg.comment_pool.empty() ? default_comment_pool() : cfg.comment_pool;
    std::vector<std::tuple<uint32_t, uint32_t, std::string>> edits;
    for (uint32_t at : chosen) {
        const std::string& text = pool[rng.index(pool.size())];
        bool block = rng.chance(0.5);
        std::string comment = block ? " /* " + text + " */" : " // " + text + "\n";
        edits.emplace_back(at, at, comment);
    }
    status = Status::Applied;
    return splice(code, std::move(edits));
}

std::string apply_whitespace_noise(const syntax::SyntaxTree& tree, const std::string& code,
                                   Rng& rng, const Config& cfg, Status& status) {
    // boundaries after each significant token that has a significant successor
    std::vector<uint32_t> sites;
    uint32_t prev = UINT32_MAX;
    for (uint32_t i = 0; i < tree.raw.size(); ++i) {
        if (syntax::is_trivia(tree.raw[i].kind)) continue;
        if (prev != UINT32_MAX && !on_preproc_line(code, tree.raw[prev].end)) {
            sites.push_back(tree.raw[prev].end);
        }
        prev = i;
    }
    if (sites.empty()) {
        status = Status::SkippedNoSite;
        return code;
    }
    auto chosen = choose_sites(std::move(sites), static_cast<size_t>(cfg.max_insertions), rng);
    std::vector<std::tuple<uint32_t, uint32_t, std::string>> edits;
    for (uint32_t at : chosen) {
        std::string pad;
        auto n = rng.range(1, 4);
        for (uint64_t i = 0; i < n; ++i) pad += rng.chance(0.25) ? '\t' : ' ';
        edits.emplace_back(at, at, pad);
    }
    status = Status::Applied;
    return splice(code, std::move(edits));
}

std::string apply_redundant_function(const syntax::SyntaxTree& tree, const std::string& code,
                                     Rng& rng, const Config& cfg, Language lang,
                                     Status& status) {
    static const std::vector<std::string> kTemplates = {
        "static int $F(int $P) {\n    return $P + 1;\n}\n",
        "static int $F(int $P) {\n    if ($P > 0) {\n        return $P;\n    }\n    return 0;\n}\n",
        "static unsigned int $F(unsigned int $P) {\n    return $P ^ 2u;\n}\n",
    };
    std::set<std::string> taken = syntax::identifier_texts(tree);
    std::string fn = fresh_identifier(rng, taken, cfg, lang);
    taken.insert(fn);
    std::string param = fresh_identifier(rng, taken, cfg, lang);
    std::string body = kTemplates[rng.index(kTemplates.size())];
    size_t at;
    while ((at = body.find("$F")) != std::string::npos) body.replace(at, 2, fn);
    while ((at = body.find("$P")) != std::string::npos) body.replace(at, 2, param);
    std::string out = code;
    if (out.empty() || out.back() != '\n') out += '\n';
    out += '\n';
    out += body;
    status = Status::Applied;
    return out;
}

std::string apply_linebreak_noise(const syntax::SyntaxTree& tree, const std::string& code,
                                  Rng& rng, const Config& cfg, Status& status) {
    auto sites = all_insertion_offsets(tree);
    if (sites.empty()) {
        status = Status::SkippedNoSite;
        return code;
    }
    auto chosen = choose_sites(std::move(sites), static_cast<size_t>(cfg.max_insertions), rng);
    std::vector<std::tuple<uint32_t, uint32_t, std::string>> edits;
    for (uint32_t at : chosen) {
        edits.emplace_back(at, at, std::string(rng.range(2, 4), '\n'));
    }
    status = Status::Applied;
    return splice(code, std::move(edits));
}

} // namespace

Outcome apply_perturbation(const std::string& code, Kind kind, const Config& config,
                           Language lang) {
    Outcome out;
    out.kind = kind;
    out.original_id = corpus::compute_id(code);
    out.code = code;
    syntax::SyntaxTree tree = syntax::parse(code, lang);
    if (tree.has_error) {
        out.status = Status::SkippedUnparsable;
        return out;
    }
    Rng rng(mix_seed(config.seed, kind_name(kind),
                     static_cast<uint64_t>(static_cast<uint8_t>(kind))));
    Status status = Status::Applied;
    std::string transformed;
    switch (kind) {
        case Kind::RenameParams:
            transformed = apply_rename(tree, code, syntax::RenameTarget::Parameter, rng,
                                       config, lang, status);
            break;
        case Kind::RenameFunction:
            transformed = apply_rename(tree, code, syntax::RenameTarget::Function, rng,
                                       config, lang, status);
            break;
        case Kind::UnreachableCode:
            transformed = apply_unreachable(tree, code, rng, config, lang, status);
            break;
        case Kind::CommentNoise:
            transformed = apply_comment_noise(tree, code, rng, config, status);
            break;
        case Kind::WhitespaceNoise:
            transformed = apply_whitespace_noise(tree, code, rng, config, status);
            break;
        case Kind::RedundantFunction:
            transformed = apply_redundant_function(tree, code, rng, config, lang, status);
            break;
        case Kind::LineBreakNoise:
            transformed = apply_linebreak_noise(tree, code, rng, config, status);
            break;
    }
    if (status == Status::Applied) {
        syntax::SyntaxTree check = syntax::parse(transformed, lang);
        if (check.has_error) {
            // a transform must never break the parse; degrade loudly as a
            // skipped variant rather than shipping a broken one
            out.status = Status::SkippedUnparsable;
            return out;
        }
        out.code = std::move(transformed);
    }
    out.status = status;
    return out;
}

namespace {

Config per_variant_config(const Config& base, const std::string& item_id, size_t ordinal) {
    Config cfg = base;
    cfg.seed = mix_seed(base.seed, item_id, ordinal);
    return cfg;
}

} // namespace

std::vector<AugmentedSample> augment_test_set(const std::vector<corpus::FunctionSample>& samples,
                                              const Config& config) {
    std::vector<AugmentedSample> out;
    out.reserve(samples.size() * kAllKinds.size());
    for (const auto& s : samples) {
        for (size_t i = 0; i < kAllKinds.size(); ++i) {
            Outcome o = apply_perturbation(s.code, kAllKinds[i],
                                           per_variant_config(config, s.id, i), s.language);
            AugmentedSample v;
            v.kind = kAllKinds[i];
            v.status = o.status;
            v.sample = s;
            if (o.status == Status::Applied) {
                v.sample.code = o.code;
                corpus::cache_fingerprint(v.sample);
            }
            out.push_back(std::move(v));
        }
    }
    return out;
}

std::vector<AugmentedPair> augment_test_set(const std::vector<corpus::SamplePair>& pairs,
                                            const Config& config, bool only_positives) {
    std::vector<AugmentedPair> out;
    out.reserve(pairs.size() * kAllKinds.size());
    for (const auto& p : pairs) {
        for (size_t i = 0; i < kAllKinds.size(); ++i) {
            AugmentedPair v;
            v.kind = kAllKinds[i];
            v.pair = p;
            Outcome pos = apply_perturbation(p.positive.code, kAllKinds[i],
                                             per_variant_config(config, p.positive.id, i),
                                             p.positive.language);
            v.positive_status = pos.status;
            if (pos.status == Status::Applied) {
                v.pair.positive.code = pos.code;
                corpus::cache_fingerprint(v.pair.positive);
            }
            if (!only_positives) {
                Outcome neg = apply_perturbation(p.negative.code, kAllKinds[i],
                                                 per_variant_config(config, p.negative.id, i),
                                                 p.negative.language);
                v.negative_status = neg.status;
                if (neg.status == Status::Applied) {
                    v.pair.negative.code = neg.code;
                    corpus::cache_fingerprint(v.pair.negative);
                }
            }
            out.push_back(std::move(v));
        }
    }
    return out;
}

namespace {

void bump(SkipStats& stats, Kind kind, Status status) {
    auto i = static_cast<size_t>(kind);
    switch (status) {
        case Status::Applied: ++stats.applied[i]; break;
        case Status::SkippedUnparsable: ++stats.skipped_unparsable[i]; break;
        case Status::SkippedNoSite: ++stats.skipped_no_site[i]; break;
    }
}

} // namespace

SkipStats tally(const std::vector<AugmentedSample>& variants) {
    SkipStats stats;
    for (const auto& v : variants) bump(stats, v.kind, v.status);
    return stats;
}

SkipStats tally(const std::vector<AugmentedPair>& variants) {
    SkipStats stats;
    for (const auto& v : variants) {
        bump(stats, v.kind, v.positive_status);
        if (v.negative_status) bump(stats, v.kind, *v.negative_status);
    }
    return stats;
}

namespace {

json sample_record(const corpus::FunctionSample& s) {
    json j;
    j["id"] = s.id;
    j["code"] = s.code;
    j["label"] = std::string(corpus::label_name(s.label));
    j["commit_id"] = s.commit_id;
    j["project"] = s.project;
    j["cwes"] = s.cwes;
    j["source"] = std::string(corpus::source_name(s.source));
    j["language"] = std::string(corpus::language_name(s.language));
    return j;
}

} // namespace

void write_augmented(const std::string& path, const std::vector<AugmentedSample>& variants) {
    std::string out;
    for (const auto& v : variants) {
        json j = sample_record(v.sample);
        j["perturbation"] = std::string(kind_name(v.kind));
        j["perturb_status"] = std::string(status_name(v.status));
        out += j.dump();
        out += '\n';
    }
    write_file(path, out);
}

void write_augmented_pairs(const std::string& path, const std::vector<AugmentedPair>& variants) {
    std::string out;
    for (const auto& v : variants) {
        json j;
        j["kind"] = v.pair.kind == corpus::PairKind::V2P ? "v2p" : "v2n";
        j["positive"] = sample_record(v.pair.positive);
        j["negative"] = sample_record(v.pair.negative);
        j["perturbation"] = std::string(kind_name(v.kind));
        Status overall = v.positive_status;
        if (v.negative_status &&
            static_cast<int>(*v.negative_status) > static_cast<int>(overall)) {
            overall = *v.negative_status;
        }
        j["perturb_status"] = std::string(status_name(overall));
        j["perturb_status_positive"] = std::string(status_name(v.positive_status));
        if (v.negative_status) {
            j["perturb_status_negative"] = std::string(status_name(*v.negative_status));
        }
        out += j.dump();
        out += '\n';
    }
    write_file(path, out);
}

std::vector<AugmentedSample> load_augmented(const std::string& path) {
    std::string content = read_file(path);
    std::vector<AugmentedSample> out;
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
        AugmentedSample v;
        try {
            v.kind = parse_kind(j.at("perturbation").get<std::string>());
            std::string st = j.at("perturb_status").get<std::string>();
            if (st == "applied") v.status = Status::Applied;
            else if (st == "skipped_unparsable") v.status = Status::SkippedUnparsable;
            else if (st == "skipped_no_site") v.status = Status::SkippedNoSite;
            else throw ConfigError("unknown perturb_status: " + st);
            v.sample.id = j.at("id").get<std::string>();
            v.sample.code = j.at("code").get<std::string>();
            v.sample.label = corpus::parse_label(j.at("label").get<std::string>());
            v.sample.commit_id = j.value("commit_id", std::string());
            v.sample.project = j.value("project", std::string());
            v.sample.source = corpus::parse_source(j.value("source", std::string("synthetic")));
            v.sample.language = corpus::parse_language(j.value("language", std::string("c")));
            if (j.contains("cwes")) {
                for (const auto& c : j["cwes"]) v.sample.cwes.push_back(c.get<std::string>());
            }
        } catch (const std::exception& e) {
            throw SchemaError(line_no, e.what());
        }
        out.push_back(std::move(v));
    }
    return out;
}

} // namespace trapeval::perturb
