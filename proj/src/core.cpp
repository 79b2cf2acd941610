#include "avrd/core.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <set>

#include "avrd/errors.hpp"

namespace avrd {

const char* to_string(AgentError::Kind kind) {
    switch (kind) {
        case AgentError::Kind::Transport: return "transport";
        case AgentError::Kind::Auth: return "auth";
        case AgentError::Kind::Exhausted: return "exhausted";
        case AgentError::Kind::Refused: return "refused";
        case AgentError::Kind::ScriptExhausted: return "script_exhausted";
    }
    return "unknown";
}

const std::vector<std::string>& known_tasks() {
    static const std::vector<std::string> tasks = {
        "music-avqa", "avsd",   "av-captioning", "av-compositional",
        "av-geoiq",   "av-meme", "dm-match",
    };
    return tasks;
}

bool is_known_task(const std::string& task) {
    const auto& tasks = known_tasks();
    return std::find(tasks.begin(), tasks.end(), task) != tasks.end();
}

bool is_captioning_task(const std::string& task) { return task == "av-captioning"; }

const char* to_string(StopReason reason) {
    switch (reason) {
        case StopReason::ThresholdReached: return "threshold_reached";
        case StopReason::IterationsExhausted: return "iterations_exhausted";
        case StopReason::AgentFailure: return "agent_failure";
    }
    return "unknown";
}

std::optional<StopReason> stop_reason_from_string(const std::string& text) {
    if (text == "threshold_reached") return StopReason::ThresholdReached;
    if (text == "iterations_exhausted") return StopReason::IterationsExhausted;
    if (text == "agent_failure") return StopReason::AgentFailure;
    return std::nullopt;
}

const char* to_string(Role role) {
    switch (role) {
        case Role::ReasoningGeneration: return "reasoning_generation";
        case Role::Summarization: return "summarization";
        case Role::Evaluation: return "evaluation";
        case Role::Feedback: return "feedback";
        case Role::ChoiceExtraction: return "choice_extraction";
        case Role::OpenEndedJudge: return "open_ended_judge";
        case Role::TargetAugmentation: return "target_augmentation";
        case Role::Target: return "target";
    }
    return "unknown";
}

std::optional<Role> role_from_string(const std::string& text) {
    static const std::array<Role, 8> roles = {
        Role::ReasoningGeneration, Role::Summarization,    Role::Evaluation,
        Role::Feedback,            Role::ChoiceExtraction, Role::OpenEndedJudge,
        Role::TargetAugmentation,  Role::Target,
    };
    for (Role role : roles) {
        if (text == to_string(role)) return role;
    }
    return std::nullopt;
}

const char* to_string(ExtractionPath path) {
    switch (path) {
        case ExtractionPath::Heuristic: return "heuristic";
        case ExtractionPath::LlmFallback: return "llm_fallback";
        case ExtractionPath::Judge: return "judge";
    }
    return "unknown";
}

std::optional<ExtractionPath> extraction_path_from_string(const std::string& text) {
    if (text == "heuristic") return ExtractionPath::Heuristic;
    if (text == "llm_fallback") return ExtractionPath::LlmFallback;
    if (text == "judge") return ExtractionPath::Judge;
    return std::nullopt;
}

std::vector<std::string> validate_sample(const Sample& sample) {
    std::vector<std::string> violations;

    if (!is_known_task(sample.task)) {
        violations.push_back("unknown task '" + sample.task + "'");
    }

    // Option labels: unique, inside A..E, contiguous from A in order.
    std::set<char> seen;
    for (const Option& opt : sample.options) {
        if (opt.label < kMinLabel || opt.label > kMaxLabel) {
            violations.push_back(std::string("option label '") + opt.label +
                                 "' outside A-E");
        }
        if (!seen.insert(opt.label).second) {
            violations.push_back(std::string("duplicate option label '") + opt.label +
                                 "'");
        }
    }
    for (std::size_t i = 0; i < sample.options.size(); ++i) {
        char expected = static_cast<char>(kMinLabel + i);
        if (sample.options[i].label != expected) {
            violations.push_back("non-contiguous labels: expected '" +
                                 std::string(1, expected) + "' at position " +
                                 std::to_string(i) + ", got '" +
                                 std::string(1, sample.options[i].label) + "'");
            break;
        }
    }

    // Ground truth must name one of the options when options are present.
    if (!sample.options.empty()) {
        bool found = false;
        for (const Option& opt : sample.options) {
            if (sample.ground_truth.size() == 1 && sample.ground_truth[0] == opt.label) {
                found = true;
                break;
            }
        }
        if (!found) {
            violations.push_back("ground_truth '" + sample.ground_truth +
                                 "' not in options");
        }
    }

    // Captioning tasks carry references and no options; other tasks the
    // reverse. Open-ended samples are simply option-free QA samples.
    if (is_captioning_task(sample.task)) {
        if (!sample.options.empty()) {
            violations.push_back("captioning sample must not carry options");
        }
        if (sample.references.empty()) {
            violations.push_back("captioning sample needs reference captions");
        }
    } else if (!sample.references.empty()) {
        violations.push_back("references are only valid for captioning tasks");
    }

    return violations;
}

namespace {

std::string hex_encode(const unsigned char* digest, std::size_t len) {
    static const char* kHex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (std::size_t i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0x0f]);
    }
    return out;
}

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
            throw Error("failed to initialize SHA-256 context");
        }
    }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(const void* data, std::size_t len) {
        if (EVP_DigestUpdate(ctx_, data, len) != 1) {
            throw Error("SHA-256 update failed");
        }
    }

    std::string hex() {
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_, digest, &len) != 1) {
            throw Error("SHA-256 finalization failed");
        }
        return hex_encode(digest, len);
    }

private:
    EVP_MD_CTX* ctx_;
};

}  // namespace

std::string content_hash(const std::vector<std::string>& parts) {
    Sha256 hasher;
    for (const std::string& part : parts) {
        // 8-byte big-endian length prefix keeps part boundaries unambiguous,
        // so ("ab") and ("a","b") hash differently.
        unsigned char prefix[8];
        std::uint64_t n = part.size();
        for (int i = 7; i >= 0; --i) {
            prefix[i] = static_cast<unsigned char>(n & 0xff);
            n >>= 8;
        }
        hasher.update(prefix, sizeof(prefix));
        hasher.update(part.data(), part.size());
    }
    return hasher.hex();
}

std::string sha256_hex(const std::string& bytes) {
    Sha256 hasher;
    hasher.update(bytes.data(), bytes.size());
    return hasher.hex();
}

}  // namespace avrd
