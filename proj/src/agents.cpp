#include "avrd/agents.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace avrd::agents {

namespace {

using nlohmann::json;

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read media file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool is_url(const std::string& ref) { return ref.find("://") != std::string::npos; }

// "http://host:8080/v1/chat" -> base "http://host:8080", path "/v1/chat".
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint must carry a scheme: " + endpoint);
    }
    auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {endpoint, "/"};
    }
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

std::string format_temperature(double temperature) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", temperature);
    return buf;
}

// Scripted mock entries of the form "!error:<kind>" become failures.
void maybe_throw_scripted_error(const std::string& backend_id, const std::string& entry) {
    constexpr const char* kPrefix = "!error:";
    if (entry.rfind(kPrefix, 0) != 0) return;
    std::string kind = entry.substr(std::char_traits<char>::length(kPrefix));
    std::string what = "mock backend '" + backend_id + "' scripted " + kind + " failure";
    if (kind == "transport") throw AgentError(AgentError::Kind::Transport, what);
    if (kind == "auth") throw AgentError(AgentError::Kind::Auth, what);
    if (kind == "refused") throw AgentError(AgentError::Kind::Refused, what);
    throw ConfigError("unknown scripted error kind: " + entry);
}

json wire_body(const BackendSpec& spec, const AgentRequest& req) {
    json parts = json::array();
    parts.push_back({{"type", "text"}, {"text", req.prompt}});
    for (const std::string& ref : req.media_refs) {
        parts.push_back({{"type", "media_ref"}, {"ref", ref}});
    }
    json body = {
        {"model", spec.model},
        {"temperature", req.temperature},
        {"messages", json::array({json{{"role", "user"}, {"content", parts}}})},
    };
    if (req.seed) body["seed"] = *req.seed;
    return body;
}

// Pulls the assistant text out of a chat-completion style response body.
std::string parse_completion_text(const std::string& body, const std::string& backend_id) {
    json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
        throw AgentError(AgentError::Kind::Transport,
                         "backend '" + backend_id + "' returned malformed JSON");
    }
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
        throw AgentError(AgentError::Kind::Transport,
                         "backend '" + backend_id + "' response carries no choices");
    }
    const json& message = j["choices"][0].value("message", json::object());
    if (!message.contains("content")) {
        throw AgentError(AgentError::Kind::Transport,
                         "backend '" + backend_id + "' response carries no content");
    }
    const json& content = message["content"];
    if (content.is_string()) return content.get<std::string>();
    if (content.is_array()) {
        std::string text;
        for (const json& part : content) {
            if (part.value("type", "") == "text") text += part.value("text", "");
        }
        return text;
    }
    throw AgentError(AgentError::Kind::Transport,
                     "backend '" + backend_id + "' response content has unknown shape");
}

}  // namespace

std::string media_digest(const std::string& ref) {
    if (is_url(ref)) {
        return sha256_hex(ref);
    }
    return sha256_hex(read_file_bytes(ref));
}

std::string cache_key(const BackendSpec& spec, const AgentRequest& req) {
    std::vector<std::string> parts;
    parts.reserve(4 + req.media_refs.size());
    parts.push_back(spec.id);
    parts.push_back(spec.model);
    parts.push_back(format_temperature(req.temperature));
    parts.push_back(req.prompt);
    for (const std::string& ref : req.media_refs) {
        parts.push_back(media_digest(ref));
    }
    return content_hash(parts);
}

std::vector<BackendSpec> parse_registry(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot read backend registry: " + file.string());
    }
    json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_array()) {
        throw ConfigError("backend registry must be a JSON array: " + file.string());
    }

    std::vector<BackendSpec> specs;
    for (const json& entry : doc) {
        BackendSpec spec;
        spec.id = entry.value("id", "");
        if (spec.id.empty()) {
            throw ConfigError("registry entry without an id in " + file.string());
        }
        std::string kind = entry.value("kind", "");
        if (kind == "http") {
            spec.kind = BackendKind::Http;
        } else if (kind == "mock") {
            spec.kind = BackendKind::Mock;
        } else {
            throw ConfigError("backend '" + spec.id + "': kind must be http or mock");
        }
        spec.endpoint = entry.value("endpoint", "");
        spec.model = entry.value("model", "");
        spec.auth_env = entry.value("auth_env", "");
        spec.max_attempts = entry.value("max_attempts", 3);
        spec.backoff_ms = entry.value("backoff_ms", 100);
        spec.requests_per_second = entry.value("requests_per_second", 0.0);
        if (spec.max_attempts < 1) {
            throw ConfigError("backend '" + spec.id + "': max_attempts must be >= 1");
        }
        if (spec.kind == BackendKind::Http) {
            if (spec.endpoint.empty()) {
                throw ConfigError("backend '" + spec.id + "': http backend needs an endpoint");
            }
            if (spec.auth_env.empty()) {
                throw ConfigError("backend '" + spec.id + "': http backend needs auth_env");
            }
            split_endpoint(spec.endpoint);  // validates the URL shape
        }
        if (entry.contains("scripts")) {
            for (const auto& [role, responses] : entry["scripts"].items()) {
                if (!role_from_string(role)) {
                    throw ConfigError("backend '" + spec.id + "': unknown scripted role '" +
                                      role + "'");
                }
                spec.scripts[role] = responses.get<std::vector<std::string>>();
            }
        }
        if (entry.contains("rules")) {
            for (const json& rule : entry["rules"]) {
                spec.rules.push_back(MockRule{rule.at("contains").get<std::string>(),
                                              rule.at("response").get<std::string>()});
            }
        }
        if (entry.contains("default_response")) {
            spec.default_response = entry["default_response"].get<std::string>();
        }
        for (const BackendSpec& existing : specs) {
            if (existing.id == spec.id) {
                throw ConfigError("duplicate backend id '" + spec.id + "' in registry");
            }
        }
        specs.push_back(std::move(spec));
    }
    return specs;
}

struct AgentRuntime::BackendState {
    BackendSpec spec;
    std::atomic<std::uint64_t> invocations{0};

    // Mock state: per-role FIFO scripts plus a capture log for audits.
    std::mutex mock_mu;
    std::map<std::string, std::deque<std::string>> scripts;
    std::vector<AgentRequest> captured;

    // Rate limiting: earliest time the next request may go out.
    std::mutex rate_mu;
    std::chrono::steady_clock::time_point next_allowed =
        std::chrono::steady_clock::now();
};

AgentRuntime::AgentRuntime(std::vector<BackendSpec> specs,
                           std::optional<std::filesystem::path> cache_dir)
    : cache_dir_(std::move(cache_dir)) {
    for (BackendSpec& spec : specs) {
        if (backends_.count(spec.id)) {
            throw ConfigError("duplicate backend id '" + spec.id + "'");
        }
        auto st = std::make_unique<BackendState>();
        for (const auto& [role, responses] : spec.scripts) {
            st->scripts[role] = std::deque<std::string>(responses.begin(), responses.end());
        }
        st->spec = std::move(spec);
        backends_[st->spec.id] = std::move(st);
    }
    if (cache_dir_) {
        std::filesystem::create_directories(*cache_dir_);
    }
}

AgentRuntime::~AgentRuntime() = default;

AgentRuntime::BackendState& AgentRuntime::state(const std::string& backend_id) {
    auto it = backends_.find(backend_id);
    if (it == backends_.end()) {
        throw ConfigError("unknown backend id '" + backend_id + "'");
    }
    return *it->second;
}

const AgentRuntime::BackendState& AgentRuntime::state(const std::string& backend_id) const {
    auto it = backends_.find(backend_id);
    if (it == backends_.end()) {
        throw ConfigError("unknown backend id '" + backend_id + "'");
    }
    return *it->second;
}

bool AgentRuntime::has_backend(const std::string& backend_id) const {
    return backends_.count(backend_id) > 0;
}

const BackendSpec& AgentRuntime::spec(const std::string& backend_id) const {
    return state(backend_id).spec;
}

std::uint64_t AgentRuntime::invocation_count(const std::string& backend_id) const {
    return state(backend_id).invocations.load();
}

std::uint64_t AgentRuntime::total_invocations() const {
    std::uint64_t total = 0;
    for (const auto& [id, st] : backends_) total += st->invocations.load();
    return total;
}

std::vector<AgentRequest> AgentRuntime::captured_requests(
    const std::string& backend_id) const {
    auto& st = const_cast<BackendState&>(state(backend_id));
    std::lock_guard<std::mutex> lock(st.mock_mu);
    return st.captured;
}

void AgentRuntime::script_mock(const std::string& backend_id, Role role,
                               std::vector<std::string> responses) {
    BackendState& st = state(backend_id);
    if (st.spec.kind != BackendKind::Mock) {
        throw ConfigError("backend '" + backend_id + "' is not a mock");
    }
    std::lock_guard<std::mutex> lock(st.mock_mu);
    st.scripts[to_string(role)] =
        std::deque<std::string>(responses.begin(), responses.end());
}

AgentResponse AgentRuntime::invoke(const AgentRequest& req) {
    // Boundary assert: the caption must derive from reasoning alone, so a
    // summarization request may never carry media.
    if (req.role == Role::Summarization && !req.media_refs.empty()) {
        throw ValidationError("summarization request must not carry media references");
    }
    BackendState& st = state(req.backend_id);

    std::optional<std::string> key;
    if (cache_dir_) {
        key = cache_key(st.spec, req);
        if (auto cached = cache_load(*key)) {
            AgentResponse resp;
            resp.text = std::move(*cached);
            resp.backend_id = req.backend_id;
            resp.cache_hit = true;
            return resp;
        }
    }

    auto start = std::chrono::steady_clock::now();
    AgentResponse resp = call_with_retries(st.spec, st, req);
    resp.latency_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    resp.backend_id = req.backend_id;

    if (key) {
        cache_store(*key, resp.text, st.spec, resp.latency_ms);
    }
    return resp;
}

AgentResponse AgentRuntime::call_with_retries(const BackendSpec& spec, BackendState& st,
                                              const AgentRequest& req) {
    std::string last_error;
    for (int attempt = 1; attempt <= spec.max_attempts; ++attempt) {
        // Rate limit each outgoing attempt; cache hits never get here.
        if (spec.requests_per_second > 0.0) {
            std::chrono::steady_clock::time_point wait_until;
            {
                std::lock_guard<std::mutex> lock(st.rate_mu);
                auto now = std::chrono::steady_clock::now();
                auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(1.0 / spec.requests_per_second));
                wait_until = std::max(st.next_allowed, now);
                st.next_allowed = wait_until + interval;
            }
            std::this_thread::sleep_until(wait_until);
        }

        st.invocations.fetch_add(1);
        try {
            if (spec.kind == BackendKind::Mock) {
                return invoke_mock(spec, st, req);
            }
            return invoke_http(spec, req);
        } catch (const AgentError& err) {
            if (err.kind() != AgentError::Kind::Transport) {
                throw;  // auth, refusal, and script exhaustion never retry
            }
            last_error = err.what();
            if (attempt == spec.max_attempts) break;
            std::this_thread::sleep_for(
                std::chrono::milliseconds(spec.backoff_ms << (attempt - 1)));
        }
    }
    throw AgentError(AgentError::Kind::Exhausted,
                     "backend '" + spec.id + "' failed after " +
                         std::to_string(spec.max_attempts) + " attempts: " + last_error);
}

AgentResponse AgentRuntime::invoke_mock(const BackendSpec& spec, BackendState& st,
                                        const AgentRequest& req) {
    std::string entry;
    {
        std::lock_guard<std::mutex> lock(st.mock_mu);
        st.captured.push_back(req);
        auto it = st.scripts.find(to_string(req.role));
        if (it != st.scripts.end()) {
            // The role was scripted: consume FIFO, fail when drained.
            if (it->second.empty()) {
                throw AgentError(AgentError::Kind::ScriptExhausted,
                                 "mock backend '" + spec.id + "' script for role '" +
                                     to_string(req.role) + "' is exhausted");
            }
            entry = it->second.front();
            it->second.pop_front();
        } else {
            const MockRule* matched = nullptr;
            for (const MockRule& rule : spec.rules) {
                if (req.prompt.find(rule.contains) != std::string::npos) {
                    matched = &rule;
                    break;
                }
            }
            if (matched) {
                entry = matched->response;
            } else if (spec.default_response) {
                entry = *spec.default_response;
            } else {
                throw AgentError(AgentError::Kind::ScriptExhausted,
                                 "mock backend '" + spec.id + "' has no script, rule, or "
                                 "default for role '" + to_string(req.role) + "'");
            }
        }
    }
    maybe_throw_scripted_error(spec.id, entry);
    AgentResponse resp;
    resp.text = std::move(entry);
    resp.backend_id = spec.id;
    return resp;
}

AgentResponse AgentRuntime::invoke_http(const BackendSpec& spec, const AgentRequest& req) {
    // Credentials are resolved before any socket is opened.
    std::string token;
    if (!spec.auth_env.empty()) {
        const char* value = std::getenv(spec.auth_env.c_str());
        if (!value || !*value) {
            throw AgentError(AgentError::Kind::Auth,
                             "backend '" + spec.id + "': credential variable " +
                                 spec.auth_env + " is not set");
        }
        token = value;
    }

    auto [base, path] = split_endpoint(spec.endpoint);
    httplib::Client client(base);
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(300, 0);
    httplib::Headers headers;
    if (!token.empty()) {
        headers.emplace("Authorization", "Bearer " + token);
    }

    std::string body = wire_body(spec, req).dump();
    httplib::Result res = client.Post(path, headers, body, "application/json");
    if (!res) {
        throw AgentError(AgentError::Kind::Transport,
                         "backend '" + spec.id + "': " + httplib::to_string(res.error()));
    }
    int status = res->status;
    if (status == 401 || status == 403) {
        throw AgentError(AgentError::Kind::Auth,
                         "backend '" + spec.id + "' rejected credentials (HTTP " +
                             std::to_string(status) + ")");
    }
    if (status == 429 || (status >= 500 && status < 600)) {
        throw AgentError(AgentError::Kind::Transport,
                         "backend '" + spec.id + "' returned HTTP " +
                             std::to_string(status));
    }
    if (status < 200 || status >= 300) {
        std::string snippet = res->body.substr(0, 200);
        throw AgentError(AgentError::Kind::Refused,
                         "backend '" + spec.id + "' refused the request (HTTP " +
                             std::to_string(status) + "): " + snippet);
    }

    AgentResponse resp;
    resp.text = parse_completion_text(res->body, spec.id);
    resp.backend_id = spec.id;
    return resp;
}

std::optional<std::string> AgentRuntime::cache_load(const std::string& key) const {
    std::filesystem::path file = *cache_dir_ / key.substr(0, 2) / (key + ".txt");
    std::ifstream in(file, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void AgentRuntime::cache_store(const std::string& key, const std::string& text,
                               const BackendSpec& spec, double latency_ms) const {
    std::filesystem::path dir = *cache_dir_ / key.substr(0, 2);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create cache directory: " + dir.string());
    }

    // Unique temp names keep concurrent writers of the same key from
    // clobbering each other's partial files; rename makes the publish atomic.
    auto write_atomic = [&dir](const std::filesystem::path& final_path,
                               const std::string& payload) {
        std::ostringstream tmp_name;
        tmp_name << final_path.filename().string() << ".tmp."
                 << std::this_thread::get_id();
        std::filesystem::path tmp = dir / tmp_name.str();
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw IoError("cannot write cache file: " + tmp.string());
            out << payload;
        }
        std::filesystem::rename(tmp, final_path);
    };

    nlohmann::json meta = {
        {"backend", spec.id},
        {"model", spec.model},
        {"timestamp", static_cast<std::int64_t>(std::time(nullptr))},
        {"latency_ms", latency_ms},
    };
    write_atomic(dir / (key + ".txt"), text);
    write_atomic(dir / (key + ".meta"), meta.dump());
}

}  // namespace avrd::agents
