#pragma once

// Backend abstraction shared by every agent role and the target model: a
// generic chat-completion HTTP client with media attached by reference, a
// deterministic scripted mock for tests and demos, retries with backoff,
// per-backend rate limiting, and a content-addressed response cache.

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "avrd/core.hpp"
#include "avrd/errors.hpp"

namespace avrd::agents {

enum class BackendKind { Http, Mock };

// Mock response rule: fires when the request prompt contains `contains`.
// Checked in order after FIFO scripts; first match wins.
struct MockRule {
    std::string contains;
    std::string response;
};

// Static description of one backend, as loaded from the registry file.
struct BackendSpec {
    std::string id;
    BackendKind kind = BackendKind::Mock;
    std::string endpoint;  // full URL, Http only
    std::string model;
    std::string auth_env;  // env var holding the bearer token, Http only
    int max_attempts = 3;
    int backoff_ms = 100;              // base retry backoff, doubles per attempt
    double requests_per_second = 0.0;  // rate limit; 0 disables

    // Mock configuration. Scripts are per-role FIFO queues; rules and the
    // default response answer anything unscripted. A scripted entry of the
    // form "!error:<kind>" (transport, auth, refused) makes the mock fail
    // that call with the named error, which is how tests exercise retries.
    std::map<std::string, std::vector<std::string>> scripts;  // role name -> FIFO
    std::vector<MockRule> rules;
    std::optional<std::string> default_response;
};

// One request to a backend. Media are opaque references passed through to
// the wire; summarization requests must not carry any (enforced at the
// runtime boundary).
struct AgentRequest {
    std::string backend_id;
    Role role = Role::Target;
    std::string prompt;
    std::vector<std::string> media_refs;
    double temperature = 0.0;
    std::optional<std::uint64_t> seed;
};

struct AgentResponse {
    std::string text;
    std::string backend_id;
    bool cache_hit = false;
    double latency_ms = 0.0;
};

// Digest of one media reference: SHA-256 of the file bytes for local paths,
// SHA-256 of the reference string itself for URLs. Throws IoError when a
// local file cannot be read.
std::string media_digest(const std::string& ref);

// Cache key for a request: content_hash over backend id, model,
// temperature, prompt bytes, and each media reference's content digest in
// order. Deterministic across processes.
std::string cache_key(const BackendSpec& spec, const AgentRequest& req);

// Parses the registry file: a JSON array of backend specs. Throws
// ConfigError on unreadable files, malformed JSON, or duplicate ids.
std::vector<BackendSpec> parse_registry(const std::filesystem::path& file);

// Owns the configured backends, the response cache, rate limiters, and the
// mock state. invoke() is safe to call from many threads.
class AgentRuntime {
public:
    explicit AgentRuntime(std::vector<BackendSpec> specs,
                          std::optional<std::filesystem::path> cache_dir = std::nullopt);
    ~AgentRuntime();  // out of line: BackendState is private to the .cpp

    AgentRuntime(const AgentRuntime&) = delete;
    AgentRuntime& operator=(const AgentRuntime&) = delete;

    // Full invocation pipeline: boundary checks, cache lookup, rate limit,
    // backend call with retries, cache store. Throws AgentError on failure
    // (kind() says whether it was transport, auth, refusal, exhaustion, or
    // an exhausted mock script).
    AgentResponse invoke(const AgentRequest& req);

    // Replaces the FIFO script of one mock role. Throws ConfigError when
    // the backend is unknown or not a mock.
    void script_mock(const std::string& backend_id, Role role,
                     std::vector<std::string> responses);

    const BackendSpec& spec(const std::string& backend_id) const;
    bool has_backend(const std::string& backend_id) const;

    // Number of actual backend calls (counted per attempt; cache hits are
    // excluded). The replay-determinism check reads these.
    std::uint64_t invocation_count(const std::string& backend_id) const;
    std::uint64_t total_invocations() const;

    // Requests that reached a mock backend, in arrival order. Used by tests
    // to audit what each role was actually sent.
    std::vector<AgentRequest> captured_requests(const std::string& backend_id) const;

    const std::optional<std::filesystem::path>& cache_dir() const { return cache_dir_; }

private:
    struct BackendState;

    BackendState& state(const std::string& backend_id);
    const BackendState& state(const std::string& backend_id) const;

    AgentResponse invoke_http(const BackendSpec& spec, const AgentRequest& req);
    AgentResponse invoke_mock(const BackendSpec& spec, BackendState& st,
                              const AgentRequest& req);
    AgentResponse call_with_retries(const BackendSpec& spec, BackendState& st,
                                    const AgentRequest& req);

    std::optional<std::string> cache_load(const std::string& key) const;
    void cache_store(const std::string& key, const std::string& text,
                     const BackendSpec& spec, double latency_ms) const;

    std::map<std::string, std::unique_ptr<BackendState>> backends_;
    std::optional<std::filesystem::path> cache_dir_;
};

}  // namespace avrd::agents
