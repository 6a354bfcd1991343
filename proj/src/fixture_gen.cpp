#include <array>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "trapeval/common.hpp"
#include "trapeval/corpus.hpp"
#include "trapeval/rng.hpp"

namespace trapeval::corpus {

namespace {

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
    size_t at = 0;
    while ((at = text.find(from, at)) != std::string::npos) {
        text.replace(at, from.size(), to);
        at += to.size();
    }
    return text;
}

// Buffer-handling bodies. Each carries a risky call (memcpy/strcpy/malloc/
// free) and behaves deterministically for the driver inputs used by the
// behavioral tests: dst/src of at least `len` bytes, 0 < len < 64, src
// NUL-terminated.
constexpr std::array<std::pair<std::string_view, std::string_view>, 4> kRiskyBodies = {{
    {"copy_block",
     "static int NAME(unsigned char *dst, const unsigned char *src, int len) {\n"
     "    int pos = 0;\n"
     "    while (pos < len) {\n"
     "        int chunk = len - pos;\n"
     "        if (chunk > 8) {\n"
     "            chunk = 8;\n"
     "        }\n"
     "        memcpy(dst + pos, src + pos, (unsigned long)chunk);\n"
     "        pos = pos + chunk;\n"
     "    }\n"
     "    return pos;\n"
     "}\n"},
    {"read_frame",
     "static int NAME(unsigned char *dst, const unsigned char *src, int len) {\n"
     "    int i;\n"
     "    unsigned int sum = 0u;\n"
     "    memcpy(dst, src, (unsigned long)len);\n"
     "    for (i = 0; i < len; i = i + 1) {\n"
     "        sum = sum + dst[i];\n"
     "    }\n"
     "    return (int)(sum & 255u);\n"
     "}\n"},
    {"pack_msg",
     "static int NAME(unsigned char *dst, const unsigned char *src, int len) {\n"
     "    char tmp[64];\n"
     "    strcpy(tmp, (const char *)src);\n"
     "    if (len > 63) {\n"
     "        len = 63;\n"
     "    }\n"
     "    memcpy(dst, tmp, (unsigned long)len);\n"
     "    return len;\n"
     "}\n"},
    {"fill_buf",
     "static int NAME(unsigned char *dst, const unsigned char *src, int len) {\n"
     "    unsigned char *tmp = (unsigned char *)malloc((unsigned long)len);\n"
     "    int i;\n"
     "    if (tmp == 0) {\n"
     "        return -1;\n"
     "    }\n"
     "    for (i = 0; i < len; i = i + 1) {\n"
     "        tmp[i] = src[i];\n"
     "    }\n"
     "    memcpy(dst, tmp, (unsigned long)len);\n"
     "    free(tmp);\n"
     "    return len;\n"
     "}\n"},
}};

// Guard lines the patched twin adds. None touches a risky call, and all are
// no-ops for the driver inputs above, so vulnerable and patched behave
// identically at test time.
constexpr std::array<std::string_view, 5> kGuards = {
    "if (len < 0) { return -1; }",
    "if (dst == 0 || src == 0) { return -1; }",
    "if (len == 0) { return 0; }",
    "if (dst == src) { return -1; }",
    "if (len > 1048576) { return -1; }",
};

constexpr std::array<std::pair<std::string_view, std::string_view>, 5> kNormalBodies = {{
    {"sum",
     "static int NAME(int a, int b) {\n"
     "    int s = 0;\n"
     "    int i;\n"
     "    for (i = a; i < b; i = i + 1) {\n"
     "        s = s + i;\n"
     "    }\n"
     "    return s;\n"
     "}\n"},
    {"max",
     "static int NAME(int a, int b) {\n"
     "    if (a > b) {\n"
     "        return a;\n"
     "    }\n"
     "    return b;\n"
     "}\n"},
    {"hash",
     "static unsigned int NAME(const unsigned char *buf, int len) {\n"
     "    unsigned int h = 2166136261u;\n"
     "    int i;\n"
     "    for (i = 0; i < len; i = i + 1) {\n"
     "        h = (h ^ buf[i]) * 16777619u;\n"
     "    }\n"
     "    return h;\n"
     "}\n"},
    {"clamp",
     "static int NAME(int v, int lo, int hi) {\n"
     "    if (v < lo) {\n"
     "        return lo;\n"
     "    }\n"
     "    if (v > hi) {\n"
     "        return hi;\n"
     "    }\n"
     "    return v;\n"
     "}\n"},
    {"parity",
     "static int NAME(unsigned int x) {\n"
     "    int p = 0;\n"
     "    while (x != 0u) {\n"
     "        p = p ^ (int)(x & 1u);\n"
     "        x = x >> 1u;\n"
     "    }\n"
     "    return p;\n"
     "}\n"},
}};

constexpr std::array<std::string_view, 4> kCwePool = {
    "CWE-787", "CWE-125", "CWE-416", "CWE-190"};

std::string guard_line(int i) {
    if (i < static_cast<int>(kGuards.size())) return std::string(kGuards[i]);
    return "if (len > " + std::to_string(1048576 + i) + ") { return -1; }";
}

std::string add_guards(const std::string& body, int count) {
    size_t brace = body.find('{');
    std::string guards;
    for (int i = 0; i < count; ++i) {
        guards += "\n    " + guard_line(i);
    }
    std::string out = body;
    out.insert(brace + 1, guards);
    return out;
}

FunctionSample make_sample(std::string code, Label label, const std::string& commit,
                           std::vector<std::string> cwes) {
    FunctionSample s;
    s.code = std::move(code);
    s.label = label;
    s.commit_id = commit;
    s.project = "fixture";
    s.cwes = std::move(cwes);
    s.source = Source::Synthetic;
    s.language = Language::C;
    s.id = compute_id(s.code);
    cache_fingerprint(s);
    return s;
}

} // namespace

std::vector<FunctionSample> gen_fixture(const FixtureConfig& config) {
    std::vector<FunctionSample> out;
    for (int k = 0; k < config.commits; ++k) {
        Rng rng(mix_seed(config.seed, "fixture-commit", static_cast<uint64_t>(k)));
        char commit[32];
        std::snprintf(commit, sizeof commit, "commit-%04d", k);
        std::vector<std::string> cwes = {std::string(kCwePool[k % kCwePool.size()])};

        const auto& [family, body] = kRiskyBodies[k % kRiskyBodies.size()];
        std::string name = std::string(family) + "_" + std::to_string(k);
        std::string vuln_code = replace_all(std::string(body), "NAME", name);
        out.push_back(make_sample(vuln_code, Label::Vulnerable, commit, cwes));
        out.push_back(make_sample(add_guards(vuln_code, config.edit_lines),
                                  Label::Patched, commit, cwes));

        for (int j = 0; j < config.normals_per_commit; ++j) {
            const auto& [tname, tbody] = kNormalBodies[rng.index(kNormalBodies.size())];
            std::string nname = "norm_" + std::string(tname) + "_" + std::to_string(k) +
                                "_" + std::to_string(j);
            out.push_back(make_sample(replace_all(std::string(tbody), "NAME", nname),
                                      Label::Normal, commit, {}));
        }
    }
    return out;
}

} // namespace trapeval::corpus
