#include "kdcvg/llm.hpp"

#include "kdcvg/errors.hpp"

#include <httplib.h>
#include <json.hpp>

namespace kdcvg {

using nlohmann::json;

std::string LlmRequest::to_json() const {
    return json{{"prompt", prompt}, {"max_tokens", max_tokens}}.dump();
}

LlmResponse LlmResponse::from_json(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw LlmError(std::string("LLM response is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("script") || !j.at("script").is_string()) {
        throw LlmError("LLM response lacks a string \"script\" field");
    }
    return {j.at("script").get<std::string>()};
}

HttpLlmClient::HttpLlmClient(std::string endpoint, int timeout_ms) : timeout_ms_(timeout_ms) {
    const auto scheme = endpoint.find("://");
    if (scheme == std::string::npos || endpoint.substr(0, scheme) != "http") {
        throw ConfigError("LLM endpoint must be an http:// URL, got '" + endpoint + "'");
    }
    const auto path_start = endpoint.find('/', scheme + 3);
    base_url_ = endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : endpoint.substr(path_start);
    if (timeout_ms_ <= 0) throw ConfigError("LLM timeout must be positive");
}

LlmResponse HttpLlmClient::complete(const LlmRequest& request) {
    httplib::Client client(base_url_);
    const auto sec = timeout_ms_ / 1000;
    const auto usec = (timeout_ms_ % 1000) * 1000;
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);

    const std::string body = request.to_json();
    std::string failure;
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto res = client.Post(path_, body, "application/json");
        if (!res) {
            failure = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            failure = "server error " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) throw LlmError("LLM endpoint returned HTTP " + std::to_string(res->status));
        return LlmResponse::from_json(res->body);
    }
    throw LlmError("LLM request failed after retry: " + failure);
}

}  // namespace kdcvg
