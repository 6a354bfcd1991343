#pragma once

#include <cstdint>
#include <string>

#include "trapeval/codebleu.hpp"
#include "trapeval/corpus.hpp"
#include "trapeval/prompt.hpp"

namespace trapeval {

// Everything a run needs, fully serializable. Each command writes the
// resolved configuration next to its outputs so reruns are reproducible;
// nothing here may depend on the clock.
struct RunConfig {
    // inputs
    std::string corpus_path;
    std::string pairs_path;

    // seeds
    uint64_t split_seed = 1;
    uint64_t v2n_seed = 2;
    uint64_t perturb_seed = 3;

    // dataset construction
    double train_ratio = 0.8;
    corpus::SplitMode split_mode = corpus::SplitMode::PairWise;

    // similarity scoring
    codebleu::Weights weights;
    std::string keywords_path; // empty selects the built-in list

    // perturbation
    int max_insertions = 5;
    bool only_positives = false;

    // endpoint
    std::string backend = "pattern-stub"; // "http" or "pattern-stub"
    std::string endpoint_url = "http://127.0.0.1:8000/v1";
    std::string model = "local-model";
    std::string api_key_env = "TRAPEVAL_API_KEY";
    int timeout_seconds = 120;

    // harness
    prompt::TemplateMode template_mode = prompt::TemplateMode::ZeroShotWithRules;
    bool strict_unparsed = false;
    int parallelism = 8;
    int max_attempts = 3;
    int initial_backoff_ms = 1000;
    std::string dataset_tag = "V2P-test";
};

const char* split_mode_name(corpus::SplitMode mode); // "samplewise" / "pairwise"
corpus::SplitMode parse_split_mode(std::string_view name); // throws ConfigError

std::string runconfig_to_json(const RunConfig& config);
RunConfig runconfig_from_json(const std::string& text); // throws ConfigError

// Reads/writes a config file; save creates the directory's run_config.json.
RunConfig load_runconfig(const std::string& path);
void save_runconfig(const std::string& dir, const RunConfig& config);

} // namespace trapeval
