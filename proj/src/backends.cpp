#include <cstdlib>
#include <httplib.h>
#include <json.hpp>
#include <set>

#include "trapeval/common.hpp"
#include "trapeval/harness.hpp"
#include "trapeval/syntax.hpp"

namespace trapeval::harness {

using nlohmann::json;

namespace {

const std::vector<std::string>& default_risky_tokens() {
    static const std::vector<std::string> tokens = {"memcpy", "strcpy", "malloc",
                                                    "free", "alloca"};
    return tokens;
}

} // namespace

PatternStubBackend::PatternStubBackend() : risky_(default_risky_tokens()) {}

PatternStubBackend::PatternStubBackend(std::vector<std::string> risky_tokens)
    : risky_(std::move(risky_tokens)) {}

std::string PatternStubBackend::complete(const corpus::FunctionSample& sample,
                                         const std::string& /*prompt*/) {
    std::set<std::string_view> risky(risky_.begin(), risky_.end());
    for (const auto& tok : syntax::tokenize(sample.code)) {
        if (risky.count(tok.text)) return "The code is vulnerable.";
    }
    return "The code is safe.";
}

namespace {

// Splits "http://host:port/prefix" into the client origin and the path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& url) {
    size_t scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw ConfigError("endpoint URL must start with http:// or https://: " + url);
    }
    size_t path_start = url.find('/', scheme + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string origin = url.substr(0, path_start);
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {origin, prefix};
}

} // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.api_key_env.empty()) {
        throw ConfigError("no API key environment variable configured");
    }
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
        throw ConfigError("environment variable " + config_.api_key_env +
                          " is not set; it must hold the API key");
    }
    api_key_ = key;
    split_base_url(config_.base_url); // validate the URL shape up front
}

std::string HttpBackend::complete(const corpus::FunctionSample& /*sample*/,
                                  const std::string& prompt) {
    auto [origin, prefix] = split_base_url(config_.base_url);
    httplib::Client client(origin);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_bearer_token_auth(api_key_);

    json body;
    body["model"] = config_.model;
    body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = 0;

    auto res = client.Post(prefix + "/chat/completions", body.dump(),
                           "application/json");
    if (!res) {
        throw TransportError("request failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw TransportError("endpoint returned HTTP " +
                             std::to_string(res->status));
    }
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) {
        throw TransportError("endpoint returned malformed JSON");
    }
    try {
        return reply.at("choices").at(0).at("message").at("content")
            .get<std::string>();
    } catch (const json::exception& e) {
        throw TransportError(std::string("unexpected response shape: ") + e.what());
    }
}

} // namespace trapeval::harness
