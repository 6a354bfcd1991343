#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trapeval/codebleu.hpp"
#include "trapeval/syntax.hpp"

namespace trapeval::corpus {

enum class Label : uint8_t { Vulnerable, Patched, Normal };
enum class Source : uint8_t { PrimeVul, DiverseVul, CVEFixes, Synthetic };

std::string_view label_name(Label l);     // "vulnerable" | "patched" | "normal"
std::string_view source_name(Source s);   // "primevul" | ...
std::string_view language_name(Language l); // "c" | "cpp"
Label parse_label(std::string_view);       // throw std::invalid_argument
Source parse_source(std::string_view);
Language parse_language(std::string_view);

struct FunctionSample {
    std::string id; // hex digest of the normalized code, recomputable
    std::string code;
    Label label = Label::Normal;
    std::string commit_id;
    std::string project;
    std::vector<std::string> cwes; // each "CWE-<digits>"
    Source source = Source::Synthetic;
    Language language = Language::C;
    std::optional<std::string> fingerprint; // cached function name, absent when unparsable
};

// Digest of the normalized code; what `id` must equal.
std::string compute_id(std::string_view code);

// Parses the sample's function name into `fingerprint` (absent when the code
// does not parse to a single named function).
void cache_fingerprint(FunctionSample& s);

struct LoadResult {
    std::vector<FunctionSample> samples;
    size_t id_mismatch_warnings = 0;
};

// JSONL, one object per line. Every record is validated; stored ids are
// recomputed from the code and mismatches counted. Throws SchemaError with
// the offending line number, or IoError.
LoadResult load_corpus(const std::string& path);

void write_corpus(const std::string& path, const std::vector<FunctionSample>& samples);

struct DedupReport {
    size_t duplicates_dropped = 0;      // extra records per (id, commit) group
    size_t label_conflicts = 0;         // groups whose members disagreed on label
    size_t cross_commit_duplicate_ids = 0; // ids that appear in more than one commit
};

// Keeps at most one sample per (id, commit_id); the survivor comes from the
// highest-priority source (PrimeVul > DiverseVul > CVEFixes > Synthetic),
// ties keeping the first occurrence in input order. Cross-commit duplicates
// are retained but reported. Idempotent.
std::vector<FunctionSample> dedup_and_resolve(const std::vector<FunctionSample>& samples,
                                              DedupReport* report = nullptr);

enum class PairKind : uint8_t { V2P, V2N };

struct SamplePair {
    PairKind kind = PairKind::V2P;
    FunctionSample positive; // label Vulnerable
    FunctionSample negative; // Patched (V2P) or Normal (V2N)
    std::optional<codebleu::Score> codebleu; // V2P only
};

// Stable identifier for score files: positive id ":" negative id.
std::string pair_id(const SamplePair& p);

struct PairReport {
    std::vector<FunctionSample> unpaired_vulnerable;
    size_t skipped_unparsable = 0; // vulnerable/patched samples without a fingerprint
    size_t ambiguous_matches = 0;  // vulnerable with several same-name patched candidates
};

// Within each commit, every vulnerable sample pairs with the first unused
// patched sample carrying the same fingerprint. Normal samples are ignored.
std::vector<SamplePair> pair_v2p(const std::vector<FunctionSample>& samples,
                                 PairReport* report = nullptr);

// Reuses the V2P positives and draws, without replacement and deterministically
// under `seed`, exactly |v2p_pairs| normals from the pool. Normals that share
// both commit and fingerprint with any positive are not eligible. Throws
// InsufficientNormals.
std::vector<SamplePair> pair_v2n(const std::vector<FunctionSample>& samples,
                                 const std::vector<SamplePair>& v2p_pairs,
                                 uint64_t seed);

void write_pairs(const std::string& path, const std::vector<SamplePair>& pairs);
std::vector<SamplePair> load_pairs(const std::string& path); // throws SchemaError/IoError

enum class SplitMode : uint8_t { SampleWise, PairWise };

struct PairSplit {
    std::vector<SamplePair> train;
    std::vector<SamplePair> test;
};
struct SampleSplit {
    std::vector<FunctionSample> train;
    std::vector<FunctionSample> test;
};

// Deterministic shuffle under `seed`; train size is round(ratio * n).
// Throws EmptyInput, or ConfigError when ratio is outside (0, 1).
PairSplit split_pairwise(const std::vector<SamplePair>& pairs, double ratio, uint64_t seed);
SampleSplit split_samplewise(const std::vector<SamplePair>& pairs, double ratio, uint64_t seed);
SampleSplit split_samples(const std::vector<FunctionSample>& samples, double ratio, uint64_t seed);

// Positive then negative of each pair, in pair order.
std::vector<FunctionSample> flatten_pairs(const std::vector<SamplePair>& pairs);

// Chat-format JSONL: user message is the fine-tuned-mode prompt, assistant
// message is "The code is vulnerable." or "The code is safe.".
// Throws EmptyInput or IoError.
void export_sft(const std::string& path, const std::vector<FunctionSample>& train);

struct FixtureConfig {
    int commits = 10;
    int normals_per_commit = 3;
    int edit_lines = 1; // lines the patched twin adds on top of the vulnerable body
    uint64_t seed = 0;
};

// Synthesizes parse-clean, compilable C functions: per commit one vulnerable
// function (a buffer-copy routine carrying a risky call), its patched twin
// (same name, `edit_lines` added guard lines), and unrelated normal functions
// free of risky calls. Ids and fingerprints are filled in.
std::vector<FunctionSample> gen_fixture(const FixtureConfig& config);

} // namespace trapeval::corpus
