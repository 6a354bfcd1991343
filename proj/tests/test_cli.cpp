#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "trapeval/common.hpp"
#include "trapeval/corpus.hpp"
#include "trapeval/runconfig.hpp"
#include "trapeval/syntax.hpp"

using namespace trapeval;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

fs::path scratch_root() {
    static fs::path root = [] {
        fs::path p = fs::path(TRAPEVAL_BUILD_DIR) / "cli_test_tmp";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

fs::path fresh_dir(const std::string& name) {
    fs::path p = scratch_root() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

CliResult run_cli(const std::string& args) {
    static int invocation = 0;
    fs::path out = scratch_root() / ("stdout." + std::to_string(invocation));
    fs::path err = scratch_root() / ("stderr." + std::to_string(invocation));
    ++invocation;
    std::string cmd = std::string(TRAPEVAL_CLI_PATH) + " " + args + " > " +
                      out.string() + " 2> " + err.string();
    int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out.string());
    r.err = read_file(err.string());
    return r;
}

std::string slurp(const fs::path& p) { return read_file(p.string()); }

std::vector<json> jsonl(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::vector<json> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(json::parse(line));
    }
    return lines;
}

// Byte-compares every regular file below the two directories.
void require_identical_trees(const fs::path& a, const fs::path& b) {
    std::vector<fs::path> rel;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (entry.is_regular_file()) rel.push_back(fs::relative(entry.path(), a));
    }
    REQUIRE(!rel.empty());
    size_t from_b = 0;
    for (const auto& entry : fs::recursive_directory_iterator(b)) {
        if (entry.is_regular_file()) ++from_b;
    }
    CHECK(from_b == rel.size());
    for (const auto& r : rel) {
        INFO("file " << r.string());
        CHECK(slurp(a / r) == slurp(b / r));
    }
}

fs::path shared_fixture() {
    static fs::path dir = [] {
        fs::path d = fresh_dir("fixture");
        auto r = run_cli("gen-fixture --out " + d.string() +
                         " --commits 12 --normals 2 --seed 5");
        REQUIRE(r.exit_code == 0);
        return d;
    }();
    return dir;
}

fs::path shared_dataset() {
    static fs::path dir = [] {
        fs::path d = fresh_dir("dataset");
        auto r = run_cli("build-dataset --corpus " +
                         (shared_fixture() / "fixture.jsonl").string() + " --out " +
                         d.string() + " --seed 7");
        REQUIRE(r.exit_code == 0);
        return d;
    }();
    return dir;
}

} // namespace

TEST_CASE("gen-fixture writes a loadable corpus plus stats and config") {
    fs::path dir = shared_fixture();
    auto loaded = corpus::load_corpus((dir / "fixture.jsonl").string());
    CHECK(loaded.samples.size() == 12 * (2 + 2)); // vulnerable + patched + normals
    CHECK(loaded.id_mismatch_warnings == 0);

    json stats = json::parse(slurp(dir / "stats.json"));
    CHECK(stats["samples"] == loaded.samples.size());
    CHECK(stats["labels"]["vulnerable"] == 12);
    CHECK(stats["labels"]["patched"] == 12);
    CHECK(stats["labels"]["normal"] == 24);
    CHECK(stats["seed"] == 5);

    RunConfig cfg = load_runconfig((dir / "run_config.json").string());
    CHECK(cfg.perturb_seed == 3); // untouched default survives the round trip
}

TEST_CASE("build-dataset emits pairs, both split flavors and stats") {
    fs::path dir = shared_dataset();
    auto v2p = corpus::load_pairs((dir / "v2p_pairs.jsonl").string());
    auto v2n = corpus::load_pairs((dir / "v2n_pairs.jsonl").string());
    CHECK(v2p.size() == 12);
    CHECK(v2n.size() == 12);
    for (const auto& p : v2n) CHECK(p.kind == corpus::PairKind::V2N);

    json stats = json::parse(slurp(dir / "stats.json"));
    CHECK(stats["v2p"]["pairs"] == 12);
    CHECK(stats["v2n"]["pairs"] == 12);
    CHECK(stats["dedup"]["kept"] == 48);

    size_t pw_train = stats["split"]["pairwise"]["v2p_train"].get<size_t>();
    size_t pw_test = stats["split"]["pairwise"]["v2p_test"].get<size_t>();
    CHECK(pw_train + pw_test == 12);
    auto train = corpus::load_pairs((dir / "pairwise/v2p_train.jsonl").string());
    auto test = corpus::load_pairs((dir / "pairwise/v2p_test.jsonl").string());
    CHECK(train.size() == pw_train);
    CHECK(test.size() == pw_test);

    // The sample-wise flavor stores individual functions, not pairs.
    auto sw = corpus::load_corpus((dir / "samplewise/v2p_test.jsonl").string());
    CHECK(stats["split"]["samplewise"]["v2p_test"] == sw.samples.size());

    // The seed fan-out reaches every stage: the stored config carries it.
    RunConfig cfg = load_runconfig((dir / "run_config.json").string());
    CHECK(cfg.split_seed == 7);
    CHECK(cfg.v2n_seed == 7);
}

TEST_CASE("corrupt corpus line is reported by number with nonzero exit") {
    fs::path dir = fresh_dir("corrupt");
    std::string text = slurp(shared_fixture() / "fixture.jsonl");
    std::vector<std::string> lines;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t nl = text.find('\n', pos);
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    REQUIRE(lines.size() >= 8);
    json j = json::parse(lines[6]);
    j.erase("code");
    lines[6] = j.dump();
    std::string joined;
    for (const auto& l : lines) joined += l + "\n";
    write_file((dir / "bad.jsonl").string(), joined);

    auto r = run_cli("build-dataset --corpus " + (dir / "bad.jsonl").string() +
                     " --out " + (dir / "out").string());
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("line 7") != std::string::npos);
}

TEST_CASE("identical invocations produce byte-identical output trees") {
    fs::path a = fresh_dir("rerun_a");
    fs::path b = fresh_dir("rerun_b");
    std::string corpus_arg =
        " --corpus " + (shared_fixture() / "fixture.jsonl").string();
    REQUIRE(run_cli("build-dataset" + corpus_arg + " --out " + a.string() +
                    " --seed 11").exit_code == 0);
    REQUIRE(run_cli("build-dataset" + corpus_arg + " --out " + b.string() +
                    " --seed 11").exit_code == 0);
    require_identical_trees(a, b);

    fs::path ea = fresh_dir("rerun_eval_a");
    fs::path eb = fresh_dir("rerun_eval_b");
    std::string eval_args = "evaluate --in " +
                            (a / "pairwise/v2p_test.jsonl").string() +
                            " --mode pairwise --backend pattern-stub --out ";
    REQUIRE(run_cli(eval_args + ea.string()).exit_code == 0);
    REQUIRE(run_cli(eval_args + eb.string()).exit_code == 0);
    require_identical_trees(ea, eb);

    fs::path pa = fresh_dir("rerun_perturb_a");
    fs::path pb = fresh_dir("rerun_perturb_b");
    std::string perturb_args = "perturb --in " +
                               (a / "pairwise/v2p_test.jsonl").string() +
                               " --mode pairwise --seed 13 --out ";
    REQUIRE(run_cli(perturb_args + pa.string()).exit_code == 0);
    REQUIRE(run_cli(perturb_args + pb.string()).exit_code == 0);
    require_identical_trees(pa, pb);
}

TEST_CASE("a different seed changes the dataset split") {
    fs::path a = fresh_dir("seed_a");
    fs::path b = fresh_dir("seed_b");
    std::string corpus_arg =
        " --corpus " + (shared_fixture() / "fixture.jsonl").string();
    REQUIRE(run_cli("build-dataset" + corpus_arg + " --out " + a.string() +
                    " --seed 1").exit_code == 0);
    REQUIRE(run_cli("build-dataset" + corpus_arg + " --out " + b.string() +
                    " --seed 2").exit_code == 0);
    CHECK(slurp(a / "pairwise/v2p_train.jsonl") !=
          slurp(b / "pairwise/v2p_train.jsonl"));
}

TEST_CASE("perturb writes one record per sample and kind plus skip stats") {
    fs::path dir = fresh_dir("perturbed");
    fs::path input = fresh_dir("perturb_input") / "ten.jsonl";
    auto samples = corpus::load_corpus(
        (shared_fixture() / "fixture.jsonl").string()).samples;
    samples.resize(10);
    corpus::write_corpus(input.string(), samples);

    auto r = run_cli("perturb --in " + input.string() +
                     " --mode samplewise --out " + dir.string() + " --seed 9");
    REQUIRE(r.exit_code == 0);

    auto records = jsonl(dir / "augmented.jsonl");
    CHECK(records.size() == 70);
    json stats = json::parse(slurp(dir / "skip_stats.json"));
    size_t applied = stats["applied"].get<size_t>();
    size_t skipped = stats["skipped_unparsable"].get<size_t>() +
                     stats["skipped_no_site"].get<size_t>();
    CHECK(applied + skipped == 70);
    CHECK(stats["per_kind"].size() == 7);
    for (const auto& rec : records) {
        CHECK(rec.contains("perturbation"));
        CHECK(rec.contains("perturb_status"));
    }
}

TEST_CASE("codebleu on identity pairs puts everything in the top bucket") {
    fs::path dir = fresh_dir("identity_scores");
    auto pairs =
        corpus::load_pairs((shared_dataset() / "v2p_pairs.jsonl").string());
    for (auto& p : pairs) {
        p.negative.code = p.positive.code;
    }
    fs::path pair_file = dir / "identity_pairs.jsonl";
    corpus::write_pairs(pair_file.string(), pairs);

    auto r = run_cli("codebleu --pairs " + pair_file.string() + " --out " +
                     dir.string());
    REQUIRE(r.exit_code == 0);

    auto scores = jsonl(dir / "scores.jsonl");
    CHECK(scores.size() == pairs.size());
    for (const auto& s : scores) {
        CHECK(s["bucket"] == ">0.95");
        CHECK(s["composite"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    }
    json summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary["retained"] == pairs.size());
    CHECK(summary["excluded"] == 0);
    size_t bucket_sum = 0;
    for (const auto& [name, count] : summary["buckets"].items()) {
        if (name != "excluded") bucket_sum += count.get<size_t>();
    }
    CHECK(bucket_sum == summary["retained"].get<size_t>());
    CHECK(slurp(dir / "buckets.md").find(">0.95") != std::string::npos);
}

TEST_CASE("codebleu reports excluded pairs separately from retained buckets") {
    fs::path dir = fresh_dir("spread_scores");
    auto r = run_cli("codebleu --pairs " +
                     (shared_dataset() / "v2p_pairs.jsonl").string() + " --out " +
                     dir.string());
    REQUIRE(r.exit_code == 0);
    json summary = json::parse(slurp(dir / "summary.json"));
    size_t retained = summary["retained"].get<size_t>();
    size_t excluded = summary["excluded"].get<size_t>();
    CHECK(retained + excluded == summary["scored"].get<size_t>());
    size_t bucket_sum = 0;
    for (const auto& [name, count] : summary["buckets"].items()) {
        if (name != "excluded") bucket_sum += count.get<size_t>();
    }
    CHECK(bucket_sum == retained);
    CHECK(summary["buckets"]["excluded"] == excluded);
}

TEST_CASE("evaluate with the pattern stub scores a paired test set at 50.00") {
    fs::path dir = fresh_dir("eval_v2p");
    auto r = run_cli("evaluate --in " +
                     (shared_dataset() / "pairwise/v2p_test.jsonl").string() +
                     " --mode pairwise --backend pattern-stub --out " +
                     dir.string() + " --tag V2P-test");
    REQUIRE(r.exit_code == 0);

    json m = json::parse(slurp(dir / "metrics.json"));
    CHECK(m["accuracy"].get<double>() == 50.0);
    CHECK(m["counts"]["unparsed"] == 0);
    CHECK(m["strict_unparsed"] == false);

    auto predictions = jsonl(dir / "predictions.jsonl");
    auto pairs = corpus::load_pairs(
        (shared_dataset() / "pairwise/v2p_test.jsonl").string());
    CHECK(predictions.size() == 2 * pairs.size());
    for (const auto& p : predictions) CHECK(p["dataset_tag"] == "V2P-test");

    auto audit = jsonl(dir / "audit.jsonl");
    CHECK(audit.size() == predictions.size());
    std::string md = slurp(dir / "metrics.md");
    CHECK(md.find("50.00") != std::string::npos);
    CHECK(md.find("unparsed: 0") != std::string::npos);
}

TEST_CASE("evaluate on unrelated-negative pairs matches a hand count of token hits") {
    fs::path dir = fresh_dir("eval_v2n");
    fs::path input = shared_dataset() / "pairwise/v2n_test.jsonl";
    auto r = run_cli("evaluate --in " + input.string() +
                     " --mode pairwise --backend pattern-stub --out " +
                     dir.string() + " --tag V2N-test");
    REQUIRE(r.exit_code == 0);

    // Recount from the raw code: the stub answers "vulnerable" exactly when a
    // risky call appears as a token, so the confusion matrix is enumerable.
    const std::set<std::string> risky = {"memcpy", "strcpy", "malloc", "free",
                                         "alloca"};
    size_t hits = 0, total = 0;
    for (const auto& p : corpus::load_pairs(input.string())) {
        for (const auto* s : {&p.positive, &p.negative}) {
            bool says_vulnerable = false;
            for (const auto& tok : syntax::tokenize(s->code)) {
                if (risky.count(std::string(tok.text))) {
                    says_vulnerable = true;
                    break;
                }
            }
            bool is_vulnerable = s->label == corpus::Label::Vulnerable;
            hits += says_vulnerable == is_vulnerable;
            ++total;
        }
    }
    REQUIRE(total > 0);
    json m = json::parse(slurp(dir / "metrics.json"));
    CHECK(m["accuracy"].get<double>() ==
          doctest::Approx(100.0 * hits / total).epsilon(1e-12));
    CHECK(m["accuracy"].get<double>() >= 90.0);
}

TEST_CASE("perturb lists an unparsable sample in the skip report and succeeds") {
    fs::path dir = fresh_dir("perturb_unparsable");
    auto samples = corpus::load_corpus(
        (shared_fixture() / "fixture.jsonl").string()).samples;
    samples.resize(3);
    corpus::FunctionSample broken = samples.front();
    broken.code = "int broken(void { if ( return ((;\n";
    broken.id = corpus::compute_id(broken.code);
    samples.push_back(broken);
    fs::path input = dir / "with_broken.jsonl";
    corpus::write_corpus(input.string(), samples);

    auto r = run_cli("perturb --in " + input.string() +
                     " --mode samplewise --out " + dir.string());
    REQUIRE(r.exit_code == 0);
    json stats = json::parse(slurp(dir / "skip_stats.json"));
    CHECK(stats["skipped_unparsable"].get<size_t>() == 7);
    size_t listed = 0;
    for (const auto& rec : jsonl(dir / "augmented.jsonl")) {
        if (rec["id"] == broken.id) {
            CHECK(rec["perturb_status"] == "skipped_unparsable");
            ++listed;
        }
    }
    CHECK(listed == 7);
}

TEST_CASE("evaluate with an http backend fails fast when the key is missing") {
    fs::path dir = fresh_dir("eval_nokey");
    unsetenv("TRAPEVAL_CLI_TEST_MISSING_KEY");
    auto r = run_cli("evaluate --in " +
                     (shared_dataset() / "pairwise/v2p_test.jsonl").string() +
                     " --mode pairwise --backend http --key-env"
                     " TRAPEVAL_CLI_TEST_MISSING_KEY --out " + dir.string());
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("TRAPEVAL_CLI_TEST_MISSING_KEY") != std::string::npos);
    CHECK(!fs::exists(dir / "predictions.jsonl"));
}

TEST_CASE("evaluate rejects an unknown backend name") {
    fs::path dir = fresh_dir("eval_badbackend");
    auto r = run_cli("evaluate --in " +
                     (shared_dataset() / "pairwise/v2p_test.jsonl").string() +
                     " --mode pairwise --backend carrier-pigeon --out " +
                     dir.string());
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("carrier-pigeon") != std::string::npos);
}

TEST_CASE("export-sft writes one chat record per sample") {
    fs::path dir = fresh_dir("sft");
    auto r = run_cli("export-sft --in " +
                     (shared_dataset() / "samplewise/v2p_train.jsonl").string() +
                     " --out " + dir.string());
    REQUIRE(r.exit_code == 0);
    auto samples = corpus::load_corpus(
        (shared_dataset() / "samplewise/v2p_train.jsonl").string()).samples;
    auto records = jsonl(dir / "sft.jsonl");
    CHECK(records.size() == samples.size());
    for (const auto& rec : records) {
        REQUIRE(rec.contains("messages"));
        REQUIRE(rec["messages"].size() == 2);
        CHECK(rec["messages"][0]["role"] == "user");
        CHECK(rec["messages"][1]["role"] == "assistant");
    }
}

TEST_CASE("report ingests a CSV table and re-emits it unchanged") {
    fs::path dir = fresh_dir("report_roundtrip");
    fs::path scored = fresh_dir("report_roundtrip_scores");
    REQUIRE(run_cli("codebleu --pairs " +
                    (shared_dataset() / "v2p_pairs.jsonl").string() + " --out " +
                    scored.string()).exit_code == 0);
    auto r = run_cli("report --csv " + (scored / "buckets.csv").string() +
                     " --out " + dir.string() + " --name buckets");
    REQUIRE(r.exit_code == 0);
    CHECK(slurp(dir / "buckets.csv") == slurp(scored / "buckets.csv"));
    CHECK(slurp(dir / "buckets.md") == slurp(scored / "buckets.md"));
}

TEST_CASE("report renders a gap-bucket table carrying a four-digit count") {
    fs::path dir = fresh_dir("report_counts");
    std::string csv =
        ",f1,acc,pre,rec,fpr,count\n"
        "Qwen3-8B / >0.95,48.58,54.49,55.83,42.99,34.02,1396\n"
        "Qwen3-8B / 0.90-0.95,55.55,56.87,57.99,46.49,33.72,684\n";
    write_file((dir / "gap.csv").string(), csv);
    auto r = run_cli("report --csv " + (dir / "gap.csv").string() + " --out " +
                     dir.string() + " --name gap");
    REQUIRE(r.exit_code == 0);
    std::string md = slurp(dir / "gap.md");
    CHECK(md.find("| Qwen3-8B / >0.95 | 48.58 | 54.49 | 55.83 | 42.99 | 34.02 "
                  "| 1396 |") != std::string::npos);
}

TEST_CASE("report applies drop markers to original/augmented row pairs") {
    fs::path dir = fresh_dir("report_markers");
    std::string csv =
        ",acc,pre\n"
        "m / CWE-787 o,52.39,50.96\n"
        "m / CWE-787 a,52.06,50.96\n";
    write_file((dir / "table.csv").string(), csv);
    auto r = run_cli("report --csv " + (dir / "table.csv").string() +
                     " --markers --out " + dir.string() + " --name marked");
    REQUIRE(r.exit_code == 0);
    std::string md = slurp(dir / "marked.md");
    CHECK(md.find("52.06↓") != std::string::npos); // strictly lower drops
    CHECK(md.find("50.96↓") == std::string::npos); // equal value does not
}

TEST_CASE("report fails cleanly on an empty CSV") {
    fs::path dir = fresh_dir("report_empty");
    write_file((dir / "empty.csv").string(), "");
    auto r = run_cli("report --csv " + (dir / "empty.csv").string() + " --out " +
                     dir.string());
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("empty table") != std::string::npos);
}

TEST_CASE("report builds a cross-eval table from prediction files") {
    fs::path eval_dir = fresh_dir("report_pred_eval");
    REQUIRE(run_cli("evaluate --in " +
                    (shared_dataset() / "pairwise/v2p_test.jsonl").string() +
                    " --mode pairwise --backend pattern-stub --out " +
                    eval_dir.string() + " --tag V2P-test --model stub-model")
                .exit_code == 0);
    fs::path dir = fresh_dir("report_pred");
    auto r = run_cli("report --predictions " +
                     (eval_dir / "predictions.jsonl").string() + " --out " +
                     dir.string() + " --name cross");
    REQUIRE(r.exit_code == 0);
    std::string md = slurp(dir / "cross.md");
    CHECK(md.find("| stub-model |") != std::string::npos);
    CHECK(md.find("V2P-test acc") != std::string::npos);
    CHECK(md.find("50.00") != std::string::npos);
}

TEST_CASE("config file values apply and explicit flags override them") {
    fs::path dir = fresh_dir("config_file");
    RunConfig file_cfg;
    file_cfg.train_ratio = 0.5;
    file_cfg.split_seed = 41;
    write_file((dir / "cfg.json").string(), runconfig_to_json(file_cfg));
    std::string corpus_arg =
        " --corpus " + (shared_fixture() / "fixture.jsonl").string();

    fs::path from_file = dir / "from_file";
    REQUIRE(run_cli("build-dataset --config " + (dir / "cfg.json").string() +
                    corpus_arg + " --out " + from_file.string()).exit_code == 0);
    RunConfig stored = load_runconfig((from_file / "run_config.json").string());
    CHECK(stored.train_ratio == 0.5);
    CHECK(stored.split_seed == 41);
    json stats = json::parse(slurp(from_file / "stats.json"));
    CHECK(stats["split"]["train_ratio"].get<double>() == 0.5);

    fs::path overridden = dir / "overridden";
    REQUIRE(run_cli("build-dataset --config " + (dir / "cfg.json").string() +
                    corpus_arg + " --train-ratio 0.75 --out " +
                    overridden.string()).exit_code == 0);
    RunConfig stored2 = load_runconfig((overridden / "run_config.json").string());
    CHECK(stored2.train_ratio == 0.75);
    CHECK(stored2.split_seed == 41); // untouched file value still applies
}

TEST_CASE("every command records its resolved configuration") {
    // Spot-check the two commands exercised most; the rest share save_runconfig.
    for (const fs::path dir : {shared_fixture(), shared_dataset()}) {
        CHECK(fs::exists(dir / "run_config.json"));
        CHECK_NOTHROW(load_runconfig((dir / "run_config.json").string()));
    }
}
