#include "trapeval/runconfig.hpp"

#include <json.hpp>

#include "trapeval/common.hpp"

namespace trapeval {

using nlohmann::json;

const char* split_mode_name(corpus::SplitMode mode) {
    return mode == corpus::SplitMode::PairWise ? "pairwise" : "samplewise";
}

corpus::SplitMode parse_split_mode(std::string_view name) {
    if (name == "pairwise") return corpus::SplitMode::PairWise;
    if (name == "samplewise") return corpus::SplitMode::SampleWise;
    throw ConfigError("unknown split mode: " + std::string(name) +
                      " (expected samplewise or pairwise)");
}

std::string runconfig_to_json(const RunConfig& c) {
    json j;
    j["corpus_path"] = c.corpus_path;
    j["pairs_path"] = c.pairs_path;
    j["split_seed"] = c.split_seed;
    j["v2n_seed"] = c.v2n_seed;
    j["perturb_seed"] = c.perturb_seed;
    j["train_ratio"] = c.train_ratio;
    j["split_mode"] = split_mode_name(c.split_mode);
    j["weights"] = {{"ngram", c.weights.ngram},
                    {"weighted_ngram", c.weights.weighted_ngram},
                    {"ast", c.weights.ast},
                    {"dataflow", c.weights.dataflow}};
    j["keywords_path"] = c.keywords_path;
    j["max_insertions"] = c.max_insertions;
    j["only_positives"] = c.only_positives;
    j["backend"] = c.backend;
    j["endpoint_url"] = c.endpoint_url;
    j["model"] = c.model;
    j["api_key_env"] = c.api_key_env;
    j["timeout_seconds"] = c.timeout_seconds;
    j["template_mode"] = prompt::template_mode_name(c.template_mode);
    j["strict_unparsed"] = c.strict_unparsed;
    j["parallelism"] = c.parallelism;
    j["max_attempts"] = c.max_attempts;
    j["initial_backoff_ms"] = c.initial_backoff_ms;
    j["dataset_tag"] = c.dataset_tag;
    return j.dump(2) + "\n";
}

RunConfig runconfig_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ConfigError("configuration is not a JSON object");
    }
    RunConfig c;
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("corpus_path", c.corpus_path);
        get("pairs_path", c.pairs_path);
        get("split_seed", c.split_seed);
        get("v2n_seed", c.v2n_seed);
        get("perturb_seed", c.perturb_seed);
        get("train_ratio", c.train_ratio);
        if (j.contains("split_mode")) {
            c.split_mode = parse_split_mode(j.at("split_mode").get<std::string>());
        }
        if (j.contains("weights")) {
            const json& w = j.at("weights");
            c.weights.ngram = w.at("ngram").get<double>();
            c.weights.weighted_ngram = w.at("weighted_ngram").get<double>();
            c.weights.ast = w.at("ast").get<double>();
            c.weights.dataflow = w.at("dataflow").get<double>();
        }
        get("keywords_path", c.keywords_path);
        get("max_insertions", c.max_insertions);
        get("only_positives", c.only_positives);
        get("backend", c.backend);
        get("endpoint_url", c.endpoint_url);
        get("model", c.model);
        get("api_key_env", c.api_key_env);
        get("timeout_seconds", c.timeout_seconds);
        if (j.contains("template_mode")) {
            c.template_mode =
                prompt::parse_template_mode(j.at("template_mode").get<std::string>());
        }
        get("strict_unparsed", c.strict_unparsed);
        get("parallelism", c.parallelism);
        get("max_attempts", c.max_attempts);
        get("initial_backoff_ms", c.initial_backoff_ms);
        get("dataset_tag", c.dataset_tag);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    return c;
}

RunConfig load_runconfig(const std::string& path) {
    return runconfig_from_json(read_file(path));
}

void save_runconfig(const std::string& dir, const RunConfig& config) {
    write_file(dir + "/run_config.json", runconfig_to_json(config));
}

} // namespace trapeval
