#pragma once

// Shared test scaffolding: source-tree paths, a scratch-directory guard,
// small file helpers, canned mock backends, and the frozen inputs behind
// the golden prompt files.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "avrd/agents.hpp"
#include "avrd/core.hpp"

namespace testsupport {

inline std::filesystem::path templates_dir() { return AVRD_TEMPLATES_DIR; }
inline std::filesystem::path data_dir() { return AVRD_TEST_DATA_DIR; }
inline std::filesystem::path golden_dir() { return AVRD_GOLDEN_DIR; }

// Scratch directory removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        std::ostringstream name;
        name << "avrd-test-" << tag << "-" << rd() << "-" << counter.fetch_add(1);
        path_ = std::filesystem::temp_directory_path() / name.str();
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

// A mock backend spec with nothing scripted yet.
inline avrd::agents::BackendSpec mock_spec(const std::string& id) {
    avrd::agents::BackendSpec spec;
    spec.id = id;
    spec.kind = avrd::agents::BackendKind::Mock;
    spec.model = id + "-model";
    return spec;
}

// A generator response in the structured dictionary shape the parser reads.
inline std::string reasoning_json(const std::vector<std::string>& steps,
                                  const std::vector<std::string>& answers,
                                  const std::string& final_answer) {
    auto list = [](const std::vector<std::string>& items) {
        std::string out = "[";
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i > 0) out += ", ";
            out += "\"" + items[i] + "\"";
        }
        return out + "]";
    };
    return "{\"Task_1\": " + list(steps) + ", \"Task_2\": " + list(answers) +
           ", \"Task_3\": \"" + final_answer + "\"}";
}

// ---------------------------------------------------------------------------
// Frozen inputs behind the golden prompt files. The goldens in tests/golden
// were produced from these exact values by an independent substitution
// implementation; changing either side breaks the byte-for-byte checks.
// ---------------------------------------------------------------------------
namespace fixture {

inline const std::string kQuestion = "What instrument is playing alongside the drums?";

inline avrd::ReasoningTrace trace() {
    avrd::ReasoningTrace t;
    t.steps = {
        "Identify the instruments visible in the video.",
        "Isolate the melodic instrument audible over the drum beat.",
        "Match the heard instrument to one shown on screen.",
    };
    t.step_answers = {
        "A guitar and a drum kit are visible.",
        "A distorted electric guitar riff is audible.",
        "The guitar on screen matches the riff.",
    };
    t.final_answer = "An electric guitar plays alongside the drums.";
    return t;
}

inline const std::string kCaption =
    "A band performs while an electric guitar riff plays over a steady drum beat.";

inline constexpr int kScore = 6;

inline std::vector<avrd::Option> options() {
    return {{'A', "Piano"}, {'B', "Electric guitar"}, {'C', "Violin"}, {'D', "Flute"}};
}

inline const std::string kChoiceResponse =
    "The instrument accompanying the drums is an electric guitar.";

inline const std::string kModelAnswer = "an electric guitar";
inline const std::string kGroundTruth = "electric guitar";

}  // namespace fixture

}  // namespace testsupport
