#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "trapeval/codebleu.hpp"
#include "trapeval/common.hpp"
#include "trapeval/corpus.hpp"
#include "trapeval/harness.hpp"
#include "trapeval/metrics.hpp"
#include "trapeval/perturb.hpp"
#include "trapeval/prompt.hpp"
#include "trapeval/report.hpp"
#include "trapeval/runconfig.hpp"

using namespace trapeval;
using nlohmann::json;

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

json label_counts(const std::vector<corpus::FunctionSample>& samples) {
    size_t vulnerable = 0, patched = 0, normal = 0;
    for (const auto& s : samples) {
        switch (s.label) {
            case corpus::Label::Vulnerable: ++vulnerable; break;
            case corpus::Label::Patched: ++patched; break;
            case corpus::Label::Normal: ++normal; break;
        }
    }
    return {{"vulnerable", vulnerable}, {"patched", patched}, {"normal", normal}};
}

void cmd_gen_fixture(const RunConfig& config, const corpus::FixtureConfig& fixture,
                     const std::string& out_dir) {
    auto samples = corpus::gen_fixture(fixture);
    ensure_dir(out_dir);
    corpus::write_corpus(out_dir + "/fixture.jsonl", samples);
    json stats;
    stats["commits"] = fixture.commits;
    stats["normals_per_commit"] = fixture.normals_per_commit;
    stats["edit_lines"] = fixture.edit_lines;
    stats["seed"] = fixture.seed;
    stats["samples"] = samples.size();
    stats["labels"] = label_counts(samples);
    write_file(out_dir + "/stats.json", stats.dump(2) + "\n");
    save_runconfig(out_dir, config);
}

void cmd_build_dataset(const RunConfig& config, const std::string& out_dir) {
    auto loaded = corpus::load_corpus(config.corpus_path);
    corpus::DedupReport dedup_report;
    auto deduped = corpus::dedup_and_resolve(loaded.samples, &dedup_report);
    corpus::PairReport pair_report;
    auto v2p = corpus::pair_v2p(deduped, &pair_report);
    auto v2n = corpus::pair_v2n(deduped, v2p, config.v2n_seed);

    ensure_dir(out_dir);
    ensure_dir(out_dir + "/pairwise");
    ensure_dir(out_dir + "/samplewise");
    corpus::write_pairs(out_dir + "/v2p_pairs.jsonl", v2p);
    corpus::write_pairs(out_dir + "/v2n_pairs.jsonl", v2n);

    auto v2p_pw = corpus::split_pairwise(v2p, config.train_ratio, config.split_seed);
    auto v2n_pw = corpus::split_pairwise(v2n, config.train_ratio, config.split_seed);
    corpus::write_pairs(out_dir + "/pairwise/v2p_train.jsonl", v2p_pw.train);
    corpus::write_pairs(out_dir + "/pairwise/v2p_test.jsonl", v2p_pw.test);
    corpus::write_pairs(out_dir + "/pairwise/v2n_train.jsonl", v2n_pw.train);
    corpus::write_pairs(out_dir + "/pairwise/v2n_test.jsonl", v2n_pw.test);

    auto v2p_sw =
        corpus::split_samplewise(v2p, config.train_ratio, config.split_seed);
    auto v2n_sw =
        corpus::split_samplewise(v2n, config.train_ratio, config.split_seed);
    corpus::write_corpus(out_dir + "/samplewise/v2p_train.jsonl", v2p_sw.train);
    corpus::write_corpus(out_dir + "/samplewise/v2p_test.jsonl", v2p_sw.test);
    corpus::write_corpus(out_dir + "/samplewise/v2n_train.jsonl", v2n_sw.train);
    corpus::write_corpus(out_dir + "/samplewise/v2n_test.jsonl", v2n_sw.test);

    json stats;
    stats["input"] = {{"records", loaded.samples.size()},
                      {"id_mismatch_warnings", loaded.id_mismatch_warnings}};
    stats["dedup"] = {
        {"kept", deduped.size()},
        {"duplicates_dropped", dedup_report.duplicates_dropped},
        {"label_conflicts", dedup_report.label_conflicts},
        {"cross_commit_duplicate_ids", dedup_report.cross_commit_duplicate_ids}};
    stats["labels"] = label_counts(deduped);
    stats["v2p"] = {{"pairs", v2p.size()},
                    {"unpaired_vulnerable", pair_report.unpaired_vulnerable.size()},
                    {"skipped_unparsable", pair_report.skipped_unparsable},
                    {"ambiguous_matches", pair_report.ambiguous_matches}};
    stats["v2n"] = {{"pairs", v2n.size()}};
    stats["split"] = {{"train_ratio", config.train_ratio},
                      {"pairwise",
                       {{"v2p_train", v2p_pw.train.size()},
                        {"v2p_test", v2p_pw.test.size()},
                        {"v2n_train", v2n_pw.train.size()},
                        {"v2n_test", v2n_pw.test.size()}}},
                      {"samplewise",
                       {{"v2p_train", v2p_sw.train.size()},
                        {"v2p_test", v2p_sw.test.size()},
                        {"v2n_train", v2n_sw.train.size()},
                        {"v2n_test", v2n_sw.test.size()}}}};
    write_file(out_dir + "/stats.json", stats.dump(2) + "\n");
    save_runconfig(out_dir, config);
}

json skip_stats_json(const perturb::SkipStats& stats) {
    json per_kind;
    size_t applied = 0, unparsable = 0, no_site = 0;
    for (size_t k = 0; k < perturb::kAllKinds.size(); ++k) {
        std::string name(perturb::kind_name(perturb::kAllKinds[k]));
        per_kind[name] = {{"applied", stats.applied[k]},
                          {"skipped_unparsable", stats.skipped_unparsable[k]},
                          {"skipped_no_site", stats.skipped_no_site[k]}};
        applied += stats.applied[k];
        unparsable += stats.skipped_unparsable[k];
        no_site += stats.skipped_no_site[k];
    }
    return {{"per_kind", per_kind},
            {"applied", applied},
            {"skipped_unparsable", unparsable},
            {"skipped_no_site", no_site}};
}

void cmd_perturb(const RunConfig& config, const std::string& in_path,
                 const std::string& out_dir) {
    perturb::Config pcfg;
    pcfg.seed = config.perturb_seed;
    pcfg.max_insertions = config.max_insertions;
    ensure_dir(out_dir);
    json stats;
    if (config.split_mode == corpus::SplitMode::PairWise) {
        auto pairs = corpus::load_pairs(in_path);
        auto variants = perturb::augment_test_set(pairs, pcfg, config.only_positives);
        perturb::write_augmented_pairs(out_dir + "/augmented.jsonl", variants);
        stats = skip_stats_json(perturb::tally(variants));
        stats["input_pairs"] = pairs.size();
        stats["variants"] = variants.size();
    } else {
        auto samples = corpus::load_corpus(in_path).samples;
        auto variants = perturb::augment_test_set(samples, pcfg);
        perturb::write_augmented(out_dir + "/augmented.jsonl", variants);
        stats = skip_stats_json(perturb::tally(variants));
        stats["input_samples"] = samples.size();
        stats["variants"] = variants.size();
    }
    write_file(out_dir + "/skip_stats.json", stats.dump(2) + "\n");
    save_runconfig(out_dir, config);
}

void cmd_codebleu(const RunConfig& config, const std::string& out_dir) {
    codebleu::validate(config.weights);
    auto pairs = corpus::load_pairs(config.pairs_path);
    const std::vector<std::string>& keywords =
        config.keywords_path.empty() ? codebleu::builtin_keywords()
                                     : codebleu::load_keywords(config.keywords_path);

    std::ostringstream scores;
    std::map<std::string, uint64_t> bucket_counts;
    uint64_t scored = 0, skipped_empty = 0, skipped_parse = 0;
    for (const auto& p : pairs) {
        codebleu::Score s;
        try {
            s = codebleu::score_pair(p.positive.code, p.negative.code,
                                     config.weights, keywords);
        } catch (const EmptyText&) {
            ++skipped_empty;
            continue;
        } catch (const ParseError&) {
            ++skipped_parse;
            continue;
        }
        ++scored;
        std::string bucket = codebleu::bucket_label(s.composite);
        ++bucket_counts[bucket];
        json line;
        line["pair_id"] = corpus::pair_id(p);
        line["ngram"] = s.ngram;
        line["weighted_ngram"] = s.weighted_ngram;
        line["ast"] = s.ast;
        if (s.dataflow.has_value()) line["dataflow"] = *s.dataflow;
        else line["dataflow"] = nullptr;
        line["composite"] = s.composite;
        line["bucket"] = bucket;
        scores << line.dump() << '\n';
    }
    ensure_dir(out_dir);
    write_file(out_dir + "/scores.jsonl", scores.str());

    report::Table table = report::bucket_count_table(bucket_counts);
    write_file(out_dir + "/buckets.md", report::to_markdown(table));
    write_file(out_dir + "/buckets.csv", report::to_csv(table));

    uint64_t excluded = bucket_counts.count("excluded") ? bucket_counts["excluded"] : 0;
    json summary;
    summary["pairs"] = pairs.size();
    summary["scored"] = scored;
    summary["retained"] = scored - excluded;
    summary["excluded"] = excluded;
    summary["skipped_empty_text"] = skipped_empty;
    summary["skipped_parse_error"] = skipped_parse;
    json buckets;
    for (const auto& name : codebleu::bucket_order()) {
        buckets[name] = bucket_counts.count(name) ? bucket_counts[name] : 0;
    }
    summary["buckets"] = buckets;
    write_file(out_dir + "/summary.json", summary.dump(2) + "\n");
    save_runconfig(out_dir, config);
}

json metrics_json(const metrics::MetricsReport& m) {
    json j;
    j["counts"] = {{"tp", m.counts.tp},
                   {"fp", m.counts.fp},
                   {"tn", m.counts.tn},
                   {"fn", m.counts.fn},
                   {"unparsed", m.counts.unparsed}};
    j["records"] = m.records;
    j["strict_unparsed"] = m.strict_unparsed;
    j["unparsed_rate"] = m.unparsed_rate();
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v.has_value()) j[key] = *v;
        else j[key] = nullptr;
    };
    put("accuracy", m.accuracy);
    put("precision", m.precision);
    put("recall", m.recall);
    put("f1", m.f1);
    put("fpr", m.fpr);
    return j;
}

void cmd_evaluate(const RunConfig& config, const std::string& in_path,
                  const std::string& out_dir) {
    std::vector<corpus::FunctionSample> samples;
    if (config.split_mode == corpus::SplitMode::PairWise) {
        samples = corpus::flatten_pairs(corpus::load_pairs(in_path));
    } else {
        samples = corpus::load_corpus(in_path).samples;
    }

    std::unique_ptr<harness::Backend> backend;
    if (config.backend == "pattern-stub") {
        backend = std::make_unique<harness::PatternStubBackend>();
    } else if (config.backend == "http") {
        harness::HttpBackendConfig http;
        http.base_url = config.endpoint_url;
        http.model = config.model;
        http.api_key_env = config.api_key_env;
        http.timeout_seconds = config.timeout_seconds;
        backend = std::make_unique<harness::HttpBackend>(std::move(http));
    } else {
        throw ConfigError("unknown backend: " + config.backend +
                          " (expected http or pattern-stub)");
    }

    ensure_dir(out_dir);
    harness::InferenceOptions options;
    options.mode = config.template_mode;
    options.model_id = config.model;
    options.dataset_tag = config.dataset_tag;
    options.parallelism = config.parallelism;
    options.max_attempts = config.max_attempts;
    options.initial_backoff_ms = config.initial_backoff_ms;
    options.audit_path = out_dir + "/audit.jsonl";
    auto records = harness::run_inference(samples, *backend, options);
    harness::write_predictions(out_dir + "/predictions.jsonl", records);

    auto m = metrics::compute_metrics(records, config.strict_unparsed);
    write_file(out_dir + "/metrics.json", metrics_json(m).dump(2) + "\n");

    metrics::CrossEvalResult single;
    single.models = {config.model};
    single.test_sets = {config.dataset_tag};
    single.cells = {{metrics::EvalCell{m, ""}}};
    report::Table table = report::cross_eval_table(single);
    std::string md = report::to_markdown(table);
    char extra[128];
    std::snprintf(extra, sizeof(extra), "\nunparsed: %llu of %llu (%.2f%%)\n",
                  static_cast<unsigned long long>(m.counts.unparsed),
                  static_cast<unsigned long long>(m.records),
                  100.0 * m.unparsed_rate());
    write_file(out_dir + "/metrics.md", md + extra);
    save_runconfig(out_dir, config);
}

void cmd_export_sft(const std::string& in_path, const std::string& out_dir,
                    const RunConfig& config) {
    auto samples = corpus::load_corpus(in_path).samples;
    ensure_dir(out_dir);
    corpus::export_sft(out_dir + "/sft.jsonl", samples);
    save_runconfig(out_dir, config);
}

void cmd_report(const RunConfig& config, const std::string& csv_path,
                const std::vector<std::string>& prediction_paths, bool markers,
                const std::string& name, const std::string& out_dir) {
    report::Table table;
    if (!csv_path.empty()) {
        table = report::from_csv(read_file(csv_path));
    } else if (!prediction_paths.empty()) {
        std::vector<harness::PredictionRecord> records;
        for (const auto& path : prediction_paths) {
            auto part = harness::load_predictions(path);
            records.insert(records.end(), part.begin(), part.end());
        }
        table = report::cross_eval_table(
            metrics::cross_eval(records, config.strict_unparsed));
    } else {
        throw ConfigError("report needs --csv or --predictions input");
    }
    if (markers) table = report::with_down_markers(std::move(table));
    ensure_dir(out_dir);
    write_file(out_dir + "/" + name + ".md", report::to_markdown(table));
    write_file(out_dir + "/" + name + ".csv", report::to_csv(table));
    save_runconfig(out_dir, config);
}

// The configuration file is applied before flag binding so that explicit
// flags always win over file values.
RunConfig preload_config(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return load_runconfig(argv[i + 1]);
        if (arg.rfind("--config=", 0) == 0) {
            return load_runconfig(arg.substr(std::string("--config=").size()));
        }
    }
    return {};
}

} // namespace

int main(int argc, char** argv) {
    RunConfig config;
    try {
        config = preload_config(argc, argv);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    CLI::App app{"Vulnerability-detection benchmark toolkit"};
    app.require_subcommand(1);
    std::string config_path, out_dir, in_path, template_name, mode_name;
    std::string csv_path, report_name = "report";
    std::vector<std::string> prediction_paths;
    uint64_t master_seed = 0;
    bool markers = false;
    corpus::FixtureConfig fixture;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "configuration JSON to start from");
        sub->add_option("--out", out_dir, "output directory")->required();
    };
    auto add_seed = [&](CLI::App* sub) {
        return sub->add_option("--seed", master_seed,
                               "seed for every random choice in this command");
    };

    auto* gen = app.add_subcommand("gen-fixture", "synthesize a labeled corpus");
    add_common(gen);
    auto* gen_seed = add_seed(gen);
    gen->add_option("--commits", fixture.commits, "number of synthetic commits");
    gen->add_option("--normals", fixture.normals_per_commit,
                    "unrelated functions per commit");
    gen->add_option("--edit-lines", fixture.edit_lines,
                    "lines the patched twin adds");

    auto* build = app.add_subcommand("build-dataset",
                                     "deduplicate, pair and split a corpus");
    add_common(build);
    auto* build_seed = add_seed(build);
    build->add_option("--corpus", config.corpus_path, "corpus JSONL to ingest");
    build->add_option("--train-ratio", config.train_ratio,
                      "fraction of pairs in the training split");
    build->add_option("--mode", mode_name, "samplewise or pairwise");

    auto* pert = app.add_subcommand("perturb",
                                    "write behavior-preserving variants");
    add_common(pert);
    auto* pert_seed = add_seed(pert);
    pert->add_option("--in", in_path, "samples or pairs JSONL")->required();
    pert->add_option("--mode", mode_name, "samplewise or pairwise input");
    pert->add_option("--max-insertions", config.max_insertions,
                     "insertion sites per noise variant");
    pert->add_flag("--only-positives", config.only_positives,
                   "perturb only the vulnerable member of each pair");

    auto* score = app.add_subcommand("codebleu", "score vulnerable/patched pairs");
    add_common(score);
    score->add_option("--pairs", config.pairs_path, "pair JSONL to score");
    score->add_option("--keywords", config.keywords_path,
                      "keyword list overriding the built-in one");

    auto* eval = app.add_subcommand("evaluate", "run a model over a test set");
    add_common(eval);
    eval->add_option("--in", in_path, "samples or pairs JSONL")->required();
    eval->add_option("--mode", mode_name, "samplewise or pairwise input");
    eval->add_option("--backend", config.backend, "http or pattern-stub");
    eval->add_option("--endpoint", config.endpoint_url, "chat completion base URL");
    eval->add_option("--model", config.model, "model name");
    eval->add_option("--template", template_name, "finetuned or zeroshot");
    eval->add_option("--tag", config.dataset_tag, "dataset tag for the records");
    eval->add_option("--key-env", config.api_key_env,
                     "environment variable holding the API key");
    eval->add_option("--parallel", config.parallelism, "concurrent requests");
    eval->add_flag("--strict-unparsed", config.strict_unparsed,
                   "score unparsed responses as safe answers");

    auto* sft = app.add_subcommand("export-sft", "write chat-format training data");
    add_common(sft);
    sft->add_option("--in", in_path, "samples JSONL")->required();

    auto* rep = app.add_subcommand("report", "render tables to markdown and CSV");
    add_common(rep);
    rep->add_option("--csv", csv_path, "precomputed table CSV to ingest");
    rep->add_option("--predictions", prediction_paths,
                    "prediction JSONL files to cross-evaluate");
    rep->add_flag("--markers", markers,
                  "derive drop markers from original/augmented row pairs");
    rep->add_option("--name", report_name, "output file base name");
    rep->add_flag("--strict-unparsed", config.strict_unparsed,
                  "score unparsed responses as safe answers");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!template_name.empty()) {
            config.template_mode = prompt::parse_template_mode(template_name);
        }
        if (!mode_name.empty()) config.split_mode = parse_split_mode(mode_name);

        if (gen->parsed()) {
            if (gen_seed->count() > 0) fixture.seed = master_seed;
            cmd_gen_fixture(config, fixture, out_dir);
        } else if (build->parsed()) {
            if (build_seed->count() > 0) {
                config.split_seed = config.v2n_seed = config.perturb_seed =
                    master_seed;
            }
            cmd_build_dataset(config, out_dir);
        } else if (pert->parsed()) {
            if (pert_seed->count() > 0) config.perturb_seed = master_seed;
            cmd_perturb(config, in_path, out_dir);
        } else if (score->parsed()) {
            cmd_codebleu(config, out_dir);
        } else if (eval->parsed()) {
            cmd_evaluate(config, in_path, out_dir);
        } else if (sft->parsed()) {
            cmd_export_sft(in_path, out_dir, config);
        } else if (rep->parsed()) {
            cmd_report(config, csv_path, prediction_paths, markers, report_name,
                       out_dir);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
