#include "trapeval/harness.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <exception>
#include <json.hpp>
#include <mutex>
#include <sstream>
#include <thread>

#include "trapeval/common.hpp"
#include "trapeval/digest.hpp"

namespace trapeval::harness {

using nlohmann::json;

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Vulnerable: return "vulnerable";
        case Verdict::Safe: return "safe";
        case Verdict::Unparsed: return "unparsed";
    }
    return "unparsed";
}

const char* truth_name(Truth t) {
    return t == Truth::Vulnerable ? "vulnerable" : "safe";
}

Verdict parse_verdict(std::string_view s) {
    if (s == "vulnerable") return Verdict::Vulnerable;
    if (s == "safe") return Verdict::Safe;
    if (s == "unparsed") return Verdict::Unparsed;
    throw std::invalid_argument("unknown verdict: " + std::string(s));
}

Truth parse_truth(std::string_view s) {
    if (s == "vulnerable") return Truth::Vulnerable;
    if (s == "safe") return Truth::Safe;
    throw std::invalid_argument("unknown ground truth: " + std::string(s));
}

Truth truth_for(corpus::Label label) {
    return label == corpus::Label::Vulnerable ? Truth::Vulnerable : Truth::Safe;
}

namespace {

// Lowercases and collapses whitespace runs so sentence detection tolerates
// line breaks and double spaces inside the canonical answers.
std::string fold(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (char c : raw) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

} // namespace

Verdict classify_response(std::string_view raw) {
    std::string text = fold(raw);
    bool vulnerable = text.find("the code is vulnerable") != std::string::npos;
    bool safe = text.find("the code is safe") != std::string::npos;
    if (vulnerable == safe) return Verdict::Unparsed; // both or neither
    return vulnerable ? Verdict::Vulnerable : Verdict::Safe;
}

void write_predictions(const std::string& path,
                       const std::vector<PredictionRecord>& records) {
    std::ostringstream out;
    for (const auto& r : records) {
        json j;
        j["sample_id"] = r.sample_id;
        j["dataset_tag"] = r.dataset_tag;
        j["model_id"] = r.model_id;
        j["prompt_digest"] = r.prompt_digest;
        j["raw_response"] = r.raw_response;
        j["verdict"] = verdict_name(r.verdict);
        j["ground_truth"] = truth_name(r.ground_truth);
        out << j.dump() << '\n';
    }
    write_file(path, out.str());
}

std::vector<PredictionRecord> load_predictions(const std::string& path) {
    std::string text = read_file(path);
    std::vector<PredictionRecord> out;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw SchemaError(line_no, "invalid JSON object");
        }
        try {
            PredictionRecord r;
            r.sample_id = j.at("sample_id").get<std::string>();
            r.dataset_tag = j.at("dataset_tag").get<std::string>();
            r.model_id = j.at("model_id").get<std::string>();
            r.prompt_digest = j.at("prompt_digest").get<std::string>();
            r.raw_response = j.at("raw_response").get<std::string>();
            r.verdict = parse_verdict(j.at("verdict").get<std::string>());
            r.ground_truth = parse_truth(j.at("ground_truth").get<std::string>());
            out.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw SchemaError(line_no, e.what());
        } catch (const std::invalid_argument& e) {
            throw SchemaError(line_no, e.what());
        }
    }
    return out;
}

namespace {

struct SampleResult {
    std::string raw;
    bool transport_failed = false;
};

// Runs backend.complete with retries; never throws TransportError itself.
SampleResult attempt_with_retries(Backend& backend,
                                  const corpus::FunctionSample& sample,
                                  const std::string& prompt,
                                  const InferenceOptions& options) {
    SampleResult result;
    int attempts = std::max(1, options.max_attempts);
    int backoff_ms = options.initial_backoff_ms;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        try {
            result.raw = backend.complete(sample, prompt);
            return result;
        } catch (const TransportError& e) {
            if (attempt == attempts) {
                result.raw = std::string("[transport error] ") + e.what();
                result.transport_failed = true;
                return result;
            }
            if (backoff_ms > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            }
            backoff_ms *= 2;
        }
    }
    return result; // unreachable
}

void run_range(const std::vector<corpus::FunctionSample>& samples,
               const std::vector<std::string>& prompts, Backend& backend,
               const InferenceOptions& options, size_t begin, size_t end,
               std::vector<PredictionRecord>& records,
               std::vector<bool>& failed) {
    std::atomic<size_t> next{begin};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < end; i = next.fetch_add(1)) {
            try {
                SampleResult res =
                    attempt_with_retries(backend, samples[i], prompts[i], options);
                PredictionRecord& r = records[i];
                r.sample_id = samples[i].id;
                r.dataset_tag = options.dataset_tag;
                r.model_id = options.model_id;
                r.prompt_digest = sha256_hex(prompts[i]);
                r.raw_response = res.raw;
                r.verdict = res.transport_failed ? Verdict::Unparsed
                                                 : classify_response(res.raw);
                r.ground_truth = truth_for(samples[i].label);
                failed[i] = res.transport_failed;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    size_t n_threads = std::min<size_t>(std::max(1, options.parallelism), end - begin);
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace

std::vector<PredictionRecord> run_inference(
    const std::vector<corpus::FunctionSample>& samples, Backend& backend,
    const InferenceOptions& options) {
    std::vector<std::string> prompts;
    prompts.reserve(samples.size());
    for (const auto& s : samples) {
        prompts.push_back(prompt::render_prompt(s.code, options.mode));
    }
    std::vector<PredictionRecord> records(samples.size());
    std::vector<bool> failed(samples.size(), false);

    // Probe the leading samples first: a mostly-dead endpoint aborts the run
    // instead of producing a full set of unusable records.
    size_t probe = std::min(options.probe_size, samples.size());
    run_range(samples, prompts, backend, options, 0, probe, records, failed);
    size_t probe_failures = 0;
    for (size_t i = 0; i < probe; ++i) probe_failures += failed[i] ? 1 : 0;
    if (probe > 0 && probe_failures * 2 > probe) {
        throw FatalTransport("endpoint unreachable: " +
                             std::to_string(probe_failures) + " of " +
                             std::to_string(probe) +
                             " probe requests failed after retries");
    }
    run_range(samples, prompts, backend, options, probe, samples.size(), records,
              failed);

    if (!options.audit_path.empty()) {
        std::ostringstream out;
        for (size_t i = 0; i < samples.size(); ++i) {
            json j;
            j["sample_id"] = records[i].sample_id;
            j["dataset_tag"] = records[i].dataset_tag;
            j["model_id"] = records[i].model_id;
            j["prompt"] = prompts[i];
            j["raw_response"] = records[i].raw_response;
            out << j.dump() << '\n';
        }
        write_file(options.audit_path, out.str());
    }
    return records;
}

} // namespace trapeval::harness
