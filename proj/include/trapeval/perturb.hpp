#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trapeval/corpus.hpp"

namespace trapeval::perturb {

// Fixed order; the ordinal feeds per-variant seed derivation.
enum class Kind : uint8_t {
    RenameParams,
    RenameFunction,
    UnreachableCode,
    CommentNoise,
    WhitespaceNoise,
    RedundantFunction,
    LineBreakNoise,
};

inline constexpr std::array<Kind, 7> kAllKinds = {
    Kind::RenameParams,    Kind::RenameFunction,    Kind::UnreachableCode,
    Kind::CommentNoise,    Kind::WhitespaceNoise,   Kind::RedundantFunction,
    Kind::LineBreakNoise,
};

std::string_view kind_name(Kind k); // "RenameParams", ...
Kind parse_kind(std::string_view name); // throws ConfigError

enum class Status : uint8_t { Applied, SkippedUnparsable, SkippedNoSite };

std::string_view status_name(Status s); // "applied" | "skipped_unparsable" | "skipped_no_site"

struct Config {
    uint64_t seed = 0;
    int min_identifier_len = 8; // generated names: lowercase alphanumeric,
    int max_identifier_len = 16; // first character alphabetic
    std::vector<std::string> comment_pool;   // empty selects the built-in pool
    std::vector<std::string> dead_stmt_pool; // "$ID" marks the fresh identifier
    int max_insertions = 5; // cap on insertion sites for the noise kinds
};

struct Outcome {
    Kind kind;
    std::string original_id; // digest of the input code
    std::string code;        // transformed when Applied, the input otherwise
    Status status;
};

// Pure given (code, kind, config). Applied outcomes parse without error flag.
Outcome apply_perturbation(const std::string& code, Kind kind, const Config& config,
                           Language lang = Language::C);

struct AugmentedSample {
    Kind kind;
    Status status;
    corpus::FunctionSample sample; // original id kept; code transformed when applied
};

// 7 variants per sample, derived with per-(sample id, kind ordinal) seeds so
// corpus order never affects any individual output.
std::vector<AugmentedSample> augment_test_set(const std::vector<corpus::FunctionSample>& samples,
                                              const Config& config);

struct AugmentedPair {
    Kind kind;
    Status positive_status = Status::Applied;
    std::optional<Status> negative_status; // absent when only positives are perturbed
    corpus::SamplePair pair;
};

// Same kind applied to both members (or only the positive member), each with
// its own per-(member id, kind ordinal) seed.
std::vector<AugmentedPair> augment_test_set(const std::vector<corpus::SamplePair>& pairs,
                                            const Config& config,
                                            bool only_positives = false);

struct SkipStats {
    std::array<size_t, 7> applied{};
    std::array<size_t, 7> skipped_unparsable{};
    std::array<size_t, 7> skipped_no_site{};
};

SkipStats tally(const std::vector<AugmentedSample>& variants);
SkipStats tally(const std::vector<AugmentedPair>& variants);

// Augmented-set JSONL: the record plus "perturbation" and "perturb_status".
// Pair records additionally carry per-member status fields.
void write_augmented(const std::string& path, const std::vector<AugmentedSample>& variants);
void write_augmented_pairs(const std::string& path, const std::vector<AugmentedPair>& variants);
std::vector<AugmentedSample> load_augmented(const std::string& path);

} // namespace trapeval::perturb
