#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "trapeval/corpus.hpp"
#include "trapeval/prompt.hpp"

namespace trapeval::harness {

enum class Verdict : uint8_t { Vulnerable, Safe, Unparsed };
enum class Truth : uint8_t { Vulnerable, Safe };

const char* verdict_name(Verdict v);   // "vulnerable" / "safe" / "unparsed"
const char* truth_name(Truth t);       // "vulnerable" / "safe"
Verdict parse_verdict(std::string_view s);
Truth parse_truth(std::string_view s);

// Vulnerable samples are the positive class; patched and normal code are safe.
Truth truth_for(corpus::Label label);

// Case-insensitive scan for the two canonical answer sentences, tolerating
// extra whitespace between their words. Exactly one found -> that verdict;
// both or neither -> Unparsed.
Verdict classify_response(std::string_view raw);

struct PredictionRecord {
    std::string sample_id;
    std::string dataset_tag;
    std::string model_id;
    std::string prompt_digest;
    std::string raw_response;
    Verdict verdict = Verdict::Unparsed;
    Truth ground_truth = Truth::Safe;
};

void write_predictions(const std::string& path,
                       const std::vector<PredictionRecord>& records);
std::vector<PredictionRecord> load_predictions(const std::string& path);

// A model endpoint. complete() returns the raw response text and throws
// TransportError on a failure worth retrying.
class Backend {
  public:
    virtual ~Backend() = default;
    virtual std::string complete(const corpus::FunctionSample& sample,
                                 const std::string& prompt) = 0;
};

// Deterministic stand-in that answers "vulnerable" exactly when the code's
// token stream contains one of the risky callee names.
class PatternStubBackend : public Backend {
  public:
    PatternStubBackend();
    explicit PatternStubBackend(std::vector<std::string> risky_tokens);
    std::string complete(const corpus::FunctionSample& sample,
                         const std::string& prompt) override;

  private:
    std::vector<std::string> risky_;
};

struct HttpBackendConfig {
    std::string base_url;           // e.g. "http://localhost:8000/v1"
    std::string model;              // model name sent in the request body
    std::string api_key_env;        // environment variable holding the bearer token
    int timeout_seconds = 120;
};

// OpenAI-style chat completion client: POST <base_url>/chat/completions with
// {model, messages: [{role: "user", content: prompt}], temperature: 0}.
// Construction throws ConfigError when the key variable is missing or empty.
class HttpBackend : public Backend {
  public:
    explicit HttpBackend(HttpBackendConfig config);
    std::string complete(const corpus::FunctionSample& sample,
                         const std::string& prompt) override;

  private:
    HttpBackendConfig config_;
    std::string api_key_;
};

struct InferenceOptions {
    prompt::TemplateMode mode = prompt::TemplateMode::ZeroShotWithRules;
    std::string model_id;
    std::string dataset_tag;
    int parallelism = 8;
    int max_attempts = 3;          // total tries per sample
    int initial_backoff_ms = 1000; // doubled after each failed attempt
    size_t probe_size = 8;         // leading samples used to detect a dead endpoint
    std::string audit_path;        // when set, every (prompt, response) is appended here
};

// One record per sample, in input order. Transient failures are retried with
// exponential backoff; a sample whose retries are exhausted yields verdict
// Unparsed with the transport error recorded in raw_response. Throws
// FatalTransport when more than half of the leading probe batch cannot be
// reached at all.
std::vector<PredictionRecord> run_inference(
    const std::vector<corpus::FunctionSample>& samples, Backend& backend,
    const InferenceOptions& options);

} // namespace trapeval::harness
