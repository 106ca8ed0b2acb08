#pragma once

#include <string>

namespace kdcvg {

struct LlmRequest {
    std::string prompt;
    int max_tokens = 512;

    std::string to_json() const;
};

struct LlmResponse {
    std::string script;

    /// Parses {"script": string}; throws LlmError on any other shape.
    static LlmResponse from_json(const std::string& body);
};

/// Text-generation boundary. Implementations must be safe to call from
/// several threads if they are shared.
class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual LlmResponse complete(const LlmRequest& request) = 0;
    /// True for the deterministic built-in; adaptation then runs locally.
    virtual bool is_mock() const { return false; }
};

/// POSTs {"prompt", "max_tokens"} as JSON and expects {"script"} back.
/// One retry on transport errors or 5xx; every other failure throws LlmError.
class HttpLlmClient final : public LlmClient {
public:
    /// endpoint: "http://host[:port]/path"
    HttpLlmClient(std::string endpoint, int timeout_ms);

    LlmResponse complete(const LlmRequest& request) override;

private:
    std::string base_url_;
    std::string path_;
    int timeout_ms_;
};

}  // namespace kdcvg
